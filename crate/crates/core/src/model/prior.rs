use super::state::Assignment;
use crate::angles::{pivotal_support_bound, PivotalAngles};
use crate::error::{Error, Result};
use crate::numerics::special::{
    dirichlet_log_pdf, ln_factorial, log_sum_exp, std_normal_log_pdf, std_normal_log_sf,
    truncated_exponential_log_pdf, truncated_poisson_log_pmf,
};
use statrs::function::gamma::ln_gamma;

/// Truncated Poisson log-pmf of the cluster count on `1..=k`.
pub fn log_prior_m(m: usize, k: usize, rate: f64) -> Result<f64> {
    truncated_poisson_log_pmf(m as u64, rate, 1, k as u64)
        .ok_or_else(|| Error::OutOfSupport(format!("m = {m} outside 1..={k}")))
}

/// `Σᵢ log q_{zᵢ}`.
pub fn log_prior_assignment(a: &Assignment, q: &[f64]) -> Result<f64> {
    if q.len() != a.m() {
        return Err(Error::DimensionMismatch {
            expected: a.m(),
            got: q.len(),
        });
    }
    if a.m() == 1 {
        return Ok(0.0);
    }
    Ok(a.labels().iter().map(|&l| q[l].ln()).sum())
}

/// Dirichlet log-density; zero for `m = 1`.
pub fn log_prior_q(q: &[f64], alpha: &[f64]) -> Result<f64> {
    if q.len() != alpha.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.len(),
            got: q.len(),
        });
    }
    if q.len() == 1 {
        return if q[0] == 1.0 {
            Ok(0.0)
        } else {
            Err(Error::OutOfSupport(format!("q = {q:?} off the simplex")))
        };
    }
    dirichlet_log_pdf(q, alpha)
        .ok_or_else(|| Error::OutOfSupport(format!("q = {q:?} on the boundary")))
}

/// Truncated-exponential log-density of each pivotal angle on
/// `(0, pivotal_support_bound(k_u))` with rate `λ_u`.
pub fn log_prior_theta(piv: &PivotalAngles, lambda: &[f64], a: &Assignment) -> Result<f64> {
    if piv.theta.len() != a.m() || lambda.len() != a.m() {
        return Err(Error::DimensionMismatch {
            expected: a.m(),
            got: piv.theta.len().max(lambda.len()),
        });
    }
    let mut acc = 0.0;
    for ((&t, &l), s) in piv.theta.iter().zip(lambda).zip(a.sizes()) {
        let bound = pivotal_support_bound(s);
        acc += truncated_exponential_log_pdf(t, l, bound).ok_or_else(|| {
            Error::OutOfSupport(format!("angle {t} outside (0, {bound}) for block size {s}"))
        })?;
    }
    Ok(acc)
}

/// Ordered chain of truncated normals: `λ_i | λ_{i−1} ~ N(0, 1)` restricted to
/// `(λ_{i−1}, ∞)`, `λ_0 = 0`.
pub fn log_prior_lambda(lambda: &[f64]) -> Result<f64> {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for &l in lambda {
        if !(l > prev) || !l.is_finite() {
            return Err(Error::OutOfSupport(format!(
                "rates must increase from 0: {lambda:?}"
            )));
        }
        acc += std_normal_log_pdf(l) - std_normal_log_sf(prev);
        prev = l;
    }
    Ok(acc)
}

/// `log ∫ Dir(q; α) Π_u q_u^{n_u} dq` for symmetric `α`.
pub fn log_dirichlet_multinomial(counts: &[usize], alpha: f64) -> f64 {
    let m = counts.len() as f64;
    let k: usize = counts.iter().sum();
    let mut acc = ln_gamma(m * alpha) - ln_gamma(m * alpha + k as f64);
    for &c in counts {
        acc += ln_gamma(alpha + c as f64) - ln_gamma(alpha);
    }
    acc
}

/// `log P(no cluster empty)` under `q ~ Dir(α 1_m)`, `Zᵢ | q ~ Mult(q)`, for
/// every `m` in `1..=k` (entry `m − 1`).
///
/// Assignments are required to be surjective, so the joint prior of `(q, Z)`
/// is renormalized by this probability; with it the marginal prior of `m` is
/// exactly the truncated Poisson law.
pub fn log_nonempty_probabilities(k: usize, alpha: f64) -> Vec<f64> {
    // w[c] = log(Γ(α + c) / (Γ(α) c!)), c ≥ 1.
    let w: Vec<f64> = (0..=k)
        .map(|c| ln_gamma(alpha + c as f64) - ln_gamma(alpha) - ln_factorial(c as u64))
        .collect();
    // f[n] after u rounds: log Σ over positive compositions of n into u parts
    // of Π w[c].
    let mut f = vec![f64::NEG_INFINITY; k + 1];
    f[0] = 0.0;
    let mut out = Vec::with_capacity(k);
    for u in 1..=k {
        let mut next = vec![f64::NEG_INFINITY; k + 1];
        for n in u..=k {
            let terms: Vec<f64> = (1..=n + 1 - u).map(|c| f[n - c] + w[c]).collect();
            next[n] = log_sum_exp(&terms);
        }
        f = next;
        let ma = u as f64 * alpha;
        out.push(ln_factorial(k as u64) + f[k] + ln_gamma(ma) - ln_gamma(ma + k as f64));
    }
    out
}
