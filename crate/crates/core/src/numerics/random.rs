use super::matrix::{DenseMatrix, LowerTriangularMatrix};
use super::special::{ln_factorial, log_sum_exp, std_normal_cdf};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Open01, StandardNormal};
use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::SQRT_2;

/// Seeded, reproducible random stream (ChaCha8).
///
/// A stream is owned by exactly one chain. Parallel chains derive distinct
/// ChaCha stream ids from the same seed via [`RngStream::with_stream`].
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "ChaCha8";

    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Same seed, independent ChaCha stream `id`.
    pub fn with_stream(seed: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        Open01.sample(self)
    }

    pub fn std_normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    pub fn uniform_index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Above this truncation point the tail mass underflows and the
/// exponential-proposal rejection sampler takes over.
const INVERSE_CDF_LIMIT: f64 = 30.0;

/// Draw from `N(0, 1)` truncated to `(lower, ∞)`.
///
/// Inverse CDF on the upper tail, `x = √2 · erfc⁻¹(2 u Φ̄(a))`, which stays
/// accurate for large `a`. Beyond `a = 30` the tail mass underflows and
/// Robert's exponential-proposal rejection is used; its acceptance rate
/// exceeds 99.8% there.
pub fn sample_truncated_normal(stream: &mut RngStream, lower: f64) -> f64 {
    assert!(lower.is_finite(), "truncation point must be finite");
    let x = if lower < INVERSE_CDF_LIMIT {
        let tail = 0.5 * erfc(lower / SQRT_2);
        let p = stream.open01() * tail;
        SQRT_2 * erfc_inv(2.0 * p)
    } else {
        let rate = 0.5 * (lower + (lower * lower + 4.0).sqrt());
        let exp = Exp::new(rate).expect("positive rate");
        loop {
            let z = lower + exp.sample(stream);
            let rho = (-0.5 * (z - rate) * (z - rate)).exp();
            if stream.open01() <= rho {
                break z;
            }
        }
    };
    if x > lower {
        x
    } else {
        lower.next_up()
    }
}

/// Draw from `N(mean, sd²)` truncated to `(lo, hi)` by inverse CDF.
///
/// Intended for intervals holding a non-negligible share of the mass; the
/// sampler keeps `mean` inside `[lo, hi]` so this always holds there.
pub fn sample_truncated_normal_interval(
    stream: &mut RngStream,
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
) -> f64 {
    assert!(sd > 0.0 && lo < hi);
    let a = std_normal_cdf((lo - mean) / sd);
    let b = std_normal_cdf((hi - mean) / sd);
    let p = a + stream.open01() * (b - a);
    let x = mean - sd * SQRT_2 * erfc_inv(2.0 * p);
    x.clamp(lo.next_up(), hi.next_down())
}

/// Draw `m ∈ [lo, hi]` with probability proportional to `rate^m / m!`.
pub fn sample_truncated_poisson(stream: &mut RngStream, rate: f64, lo: u64, hi: u64) -> u64 {
    assert!(1 <= lo && lo <= hi && rate > 0.0);
    if lo == hi {
        return lo;
    }
    let log_w: Vec<f64> = (lo..=hi)
        .map(|m| m as f64 * rate.ln() - ln_factorial(m))
        .collect();
    let norm = log_sum_exp(&log_w);
    let u = stream.open01();
    let mut cum = 0.0;
    for (m, lw) in (lo..=hi).zip(&log_w) {
        cum += (lw - norm).exp();
        if u <= cum {
            return m;
        }
    }
    hi
}

/// Draw from `Dirichlet(alpha)`.
///
/// Gamma variates are formed in log space; for `αᵢ < 1` the boost
/// `G(α) = G(α+1) · U^{1/α}` avoids underflow to exact zeros.
pub fn sample_dirichlet(stream: &mut RngStream, alpha: &[f64]) -> Vec<f64> {
    assert!(!alpha.is_empty() && alpha.iter().all(|&a| a > 0.0));
    if alpha.len() == 1 {
        return vec![1.0];
    }
    let log_g: Vec<f64> = alpha
        .iter()
        .map(|&a| {
            if a >= 1.0 {
                let g: f64 = Gamma::new(a, 1.0).expect("valid shape").sample(stream);
                g.ln()
            } else {
                let g: f64 = Gamma::new(a + 1.0, 1.0)
                    .expect("valid shape")
                    .sample(stream);
                g.ln() + stream.open01().ln() / a
            }
        })
        .collect();
    let norm = log_sum_exp(&log_g);
    let mut q: Vec<f64> = log_g
        .iter()
        .map(|lg| (lg - norm).exp().max(f64::MIN_POSITIVE))
        .collect();
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= total);
    q
}

/// Draw from the wrapped exponential with rate `lambda` truncated to
/// `(0, upper)`, `upper < 2π`; equivalently a truncated exponential.
pub fn sample_truncated_wrapped_exponential(
    stream: &mut RngStream,
    lambda: f64,
    upper: f64,
) -> f64 {
    assert!(lambda > 0.0 && upper > 0.0 && upper < 2.0 * std::f64::consts::PI);
    let u = stream.open01();
    let theta = -(u * (-lambda * upper).exp_m1()).ln_1p() / lambda;
    theta.clamp(f64::MIN_POSITIVE, upper.next_down())
}

/// `n` i.i.d. rows from `N(0, R)` with `R = r_chol r_cholᵀ`.
pub fn sample_mvn_zero(
    stream: &mut RngStream,
    r_chol: &LowerTriangularMatrix,
    n: usize,
) -> DenseMatrix {
    let k = r_chol.dim();
    let mut out = DenseMatrix::zeros(n, k);
    let mut z = vec![0.0; k];
    for r in 0..n {
        z.iter_mut().for_each(|v| *v = stream.std_normal());
        let row = out.row_mut(r);
        for (i, slot) in row.iter_mut().enumerate() {
            *slot = r_chol.row(i).iter().zip(&z).map(|(a, b)| a * b).sum();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::cholesky_decompose;
    use crate::numerics::matrix::SymmetricMatrix;
    use crate::numerics::special::truncated_exponential_cdf;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn half_normal_mean() {
        let mut s = RngStream::new(1);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_truncated_normal(&mut s, 0.0))
            .collect();
        assert!(draws.iter().all(|&x| x > 0.0));
        let mean = draws.iter().sum::<f64>() / n as f64;
        // Var of the half-normal is 1 - 2/π.
        let se = ((1.0 - 2.0 / PI) / n as f64).sqrt();
        assert!((mean - (2.0 / PI).sqrt()).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn truncated_normal_support_and_tail() {
        let mut s = RngStream::new(2);
        assert!((0..10_000).all(|_| sample_truncated_normal(&mut s, 5.0) > 5.0));
        for &a in &[12.0, 29.9, 30.0, 45.0, 300.0] {
            for _ in 0..200 {
                let x = sample_truncated_normal(&mut s, a);
                assert!(x > a && x < a + 2.0, "a {a} x {x}");
            }
        }
        // Negative truncation points work too.
        assert!((0..1000).all(|_| sample_truncated_normal(&mut s, -3.0) > -3.0));
    }

    #[test]
    fn truncated_normal_deterministic() {
        let a: Vec<f64> = {
            let mut s = RngStream::new(77);
            (0..50)
                .map(|_| sample_truncated_normal(&mut s, 0.3))
                .collect()
        };
        let b: Vec<f64> = {
            let mut s = RngStream::new(77);
            (0..50)
                .map(|_| sample_truncated_normal(&mut s, 0.3))
                .collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn interval_truncated_normal_ks() {
        use crate::numerics::special::std_normal_cdf;
        let (mean, sd, lo, hi) = (1.2, 0.15, 0.0, 1.23);
        let mut s = RngStream::new(8);
        let n = 50_000;
        let mut x: Vec<f64> = (0..n)
            .map(|_| sample_truncated_normal_interval(&mut s, mean, sd, lo, hi))
            .collect();
        assert!(x.iter().all(|&v| v > lo && v < hi));
        x.sort_by(f64::total_cmp);
        let (a, b) = (
            std_normal_cdf((lo - mean) / sd),
            std_normal_cdf((hi - mean) / sd),
        );
        let cdf = |v: f64| (std_normal_cdf((v - mean) / sd) - a) / (b - a);
        let d = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = cdf(v);
                ((i + 1) as f64 / n as f64 - f).max(f - i as f64 / n as f64)
            })
            .fold(0.0, f64::max);
        assert!(d < 1.95 / (n as f64).sqrt(), "D = {d}");
    }

    /// Pearson chi-square critical value at p = 0.001 for small dof.
    fn chi2_crit(dof: usize) -> f64 {
        [10.83, 13.82, 16.27, 18.47, 20.52][dof - 1]
    }

    #[test]
    fn truncated_poisson_pmf_chi_square() {
        let mut s = RngStream::new(3);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[sample_truncated_poisson(&mut s, 1.0, 1, 3) as usize - 1] += 1;
        }
        let expected = [0.6, 0.3, 0.1];
        let chi2: f64 = counts
            .iter()
            .zip(expected)
            .map(|(&c, p)| {
                let e = p * n as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        assert!(chi2 < chi2_crit(2), "chi2 {chi2}");
    }

    #[test]
    fn truncated_poisson_degenerate_and_wide() {
        let mut s = RngStream::new(4);
        assert!((0..100).all(|_| sample_truncated_poisson(&mut s, 2.5, 4, 4) == 4));

        // Exact pmf table oracle on 1..=30 for rate 3.
        let (rate, hi) = (3.0_f64, 30u64);
        let weights: Vec<f64> = (1..=hi)
            .map(|m| {
                let mut w = 1.0;
                for j in 1..=m {
                    w *= rate / j as f64;
                }
                w
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let n = 200_000;
        let mut counts = vec![0usize; hi as usize];
        for _ in 0..n {
            counts[sample_truncated_poisson(&mut s, rate, 1, hi) as usize - 1] += 1;
        }
        for (m, (&c, w)) in counts.iter().zip(&weights).enumerate() {
            let p = w / total;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (c as f64 / n as f64 - p).abs() <= 4.0 * se + 1e-6,
                "m={} freq {} p {}",
                m + 1,
                c as f64 / n as f64,
                p
            );
        }
    }

    #[test]
    fn dirichlet_single_and_simplex() {
        let mut s = RngStream::new(5);
        assert_eq!(sample_dirichlet(&mut s, &[1.0]), vec![1.0]);
        for alpha in [
            vec![0.01, 0.01, 0.01],
            vec![1.0, 2.0],
            vec![50.0; 6],
            vec![1e-3, 5.0],
        ] {
            for _ in 0..500 {
                let q = sample_dirichlet(&mut s, &alpha);
                assert!(q.iter().all(|&v| v > 0.0));
                assert!((q.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn dirichlet_uniform_marginal_ks() {
        let mut s = RngStream::new(6);
        let n = 100_000;
        let mut x: Vec<f64> = (0..n)
            .map(|_| sample_dirichlet(&mut s, &[1.0, 1.0])[0])
            .collect();
        x.sort_by(f64::total_cmp);
        let d = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let hi = (i + 1) as f64 / n as f64 - v;
                let lo = v - i as f64 / n as f64;
                hi.max(lo)
            })
            .fold(0.0, f64::max);
        // KS critical value at α = 0.001.
        assert!(d < 1.95 / (n as f64).sqrt(), "D = {d}");
    }

    #[test]
    fn dirichlet_symmetric_mean() {
        let mut s = RngStream::new(7);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_dirichlet(&mut s, &[5.0, 5.0])[0])
            .sum::<f64>()
            / n as f64;
        // Beta(5,5) variance = 25 / (100 * 11).
        let se = (25.0 / 1100.0 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn wrapped_exponential_median_and_support() {
        let mut s = RngStream::new(8);
        let (lambda, upper) = (1.3, 2.0);
        let n = 100_000;
        let mut x: Vec<f64> = (0..n)
            .map(|_| sample_truncated_wrapped_exponential(&mut s, lambda, upper))
            .collect();
        assert!(x.iter().all(|&v| v > 0.0 && v < upper));
        x.sort_by(f64::total_cmp);
        let median = x[n / 2];
        let cdf = truncated_exponential_cdf(median, lambda, upper);
        assert!((cdf - 0.5).abs() < 0.01, "cdf(median) {cdf}");

        assert!((0..10_000)
            .all(|_| sample_truncated_wrapped_exponential(&mut s, 0.5, FRAC_PI_2) < FRAC_PI_2));

        let big = 200.0;
        let below = (0..n)
            .filter(|_| sample_truncated_wrapped_exponential(&mut s, big, 3.0) < 5.0 / big)
            .count();
        assert!(below as f64 / n as f64 >= 0.99);
    }

    #[test]
    fn mvn_identity_covariance() {
        let mut s = RngStream::new(9);
        let y = sample_mvn_zero(&mut s, &LowerTriangularMatrix::identity(3), 100_000);
        let cov = y.cross_product();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((cov.get(i, j) / 100_000.0 - target).abs() < 0.02);
            }
        }
    }

    #[test]
    fn mvn_correlation_recovered() {
        let mut s = RngStream::new(10);
        let r = SymmetricMatrix::from_rows(&[vec![1.0, 0.8], vec![0.8, 1.0]]).unwrap();
        let l = cholesky_decompose(&r).unwrap();
        let y = sample_mvn_zero(&mut s, &l, 100_000);
        assert!((y.column_correlation().get(0, 1) - 0.8).abs() < 0.02);

        let r3 = SymmetricMatrix::from_rows(&[
            vec![1.0, 0.5, 0.2],
            vec![0.5, 1.0, -0.3],
            vec![0.2, -0.3, 1.0],
        ])
        .unwrap();
        let y = sample_mvn_zero(&mut s, &cholesky_decompose(&r3).unwrap(), 100_000);
        assert!(y.column_correlation().max_abs_diff(&r3) < 0.02);
    }

    #[test]
    fn mvn_reproducible() {
        let l = LowerTriangularMatrix::identity(4);
        let a = sample_mvn_zero(&mut RngStream::new(12), &l, 10);
        let b = sample_mvn_zero(&mut RngStream::new(12), &l, 10);
        assert_eq!(a, b);
        let c = sample_mvn_zero(&mut RngStream::with_stream(12, 1), &l, 10);
        assert_ne!(a, c);
    }
}
