//! Hyperspherical-angle parameterization of correlation matrices.
//!
//! Row `i` of the Cholesky factor `B` of a correlation matrix is a unit vector,
//! so it can be written with `i` angles:
//!
//! ```text
//! b_i1 = cos θ_i1
//! b_ij = cos θ_ij · Π_{l<j} sin θ_il      (1 < j < i)
//! b_ii = Π_{l<i} sin θ_il
//! ```
//!
//! With every angle in `[0, π)` the diagonal of `B` is nonnegative and the
//! map is a bijection onto correlation matrices. A block-diagonal matrix
//! built from equicorrelated blocks is fixed by one pivotal angle per block,
//! `r_u = cos θ_u`: its cross-block angles are all `π/2` and its within-block
//! angles depend only on the column.

use crate::error::{Error, Result};
use crate::numerics::{cholesky_decompose, LowerTriangularMatrix, SymmetricMatrix};
use std::f64::consts::{FRAC_PI_2, PI};

/// Partial sine products below this make the remaining angles of a row
/// unidentifiable.
pub const DEGENERATE_PRODUCT: f64 = 1e-13;

#[inline]
fn angle_index(i: usize, j: usize) -> usize {
    debug_assert!(j < i);
    i * (i - 1) / 2 + j
}

/// Strictly lower-triangular matrix of `k(k−1)/2` angles in `[0, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleMatrix {
    dim: usize,
    theta: Vec<f64>,
}

impl AngleMatrix {
    /// All angles `π/2`, i.e. the identity correlation matrix.
    pub fn orthogonal(dim: usize) -> Self {
        Self {
            dim,
            theta: vec![FRAC_PI_2; dim * dim.saturating_sub(1) / 2],
        }
    }

    /// Builds from `f(i, j)` for `j < i`, validating the range.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut theta = Vec::with_capacity(dim * dim.saturating_sub(1) / 2);
        for i in 1..dim {
            for j in 0..i {
                let t = f(i, j);
                if !(0.0..PI).contains(&t) {
                    return Err(Error::InvalidInput(format!(
                        "angle ({i}, {j}) = {t} outside [0, pi)"
                    )));
                }
                theta.push(t);
            }
        }
        Ok(Self { dim, theta })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.theta[angle_index(i, j)]
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.theta
            .iter()
            .zip(&other.theta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Contiguous block sizes `k_1, …, k_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    sizes: Vec<usize>,
}

impl BlockStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidInput(
                "block sizes must be a nonempty list of positive integers".into(),
            ));
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Block index of every variable.
    pub fn membership(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(u, &s)| std::iter::repeat_n(u, s))
            .collect()
    }
}

/// One angle per block; `r_u = cos θ_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotalAngles {
    pub theta: Vec<f64>,
}

impl PivotalAngles {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta }
    }

    /// Checks `0 < θ_u < pivotal_support_bound(k_u)` for every block.
    pub fn check_support(&self, sizes: &[usize]) -> Result<()> {
        if self.theta.len() != sizes.len() {
            return Err(Error::DimensionMismatch {
                expected: sizes.len(),
                got: self.theta.len(),
            });
        }
        for (u, (&t, &s)) in self.theta.iter().zip(sizes).enumerate() {
            let bound = pivotal_support_bound(s);
            if !(t > 0.0 && t < bound) {
                return Err(Error::OutOfSupport(format!(
                    "pivotal angle {u} = {t} outside (0, {bound}) for block size {s}"
                )));
            }
        }
        Ok(())
    }
}

pub fn angles_to_cholesky(theta: &AngleMatrix) -> LowerTriangularMatrix {
    let k = theta.dim();
    let mut b = LowerTriangularMatrix::zeros(k);
    for i in 0..k {
        let mut prod = 1.0;
        let row = b.row_mut(i);
        for (j, slot) in row[..i].iter_mut().enumerate() {
            let t = theta.get(i, j);
            *slot = t.cos() * prod;
            prod *= t.sin();
        }
        row[i] = prod;
    }
    b
}

/// Outcome for a row whose sine product vanishes before the diagonal.
#[derive(Clone, Copy)]
enum DegeneratePolicy {
    Fail,
    FillOrthogonal,
}

fn angles_of_factor(b: &LowerTriangularMatrix, policy: DegeneratePolicy) -> Result<AngleMatrix> {
    let k = b.dim();
    let mut theta = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 1..k {
        let row = b.row(i);
        // tail[j] = ‖row[j..]‖, the partial sine product before column j.
        let mut tail = vec![0.0_f64; i + 2];
        for j in (0..=i).rev() {
            tail[j] = tail[j + 1].hypot(row[j]);
        }
        let norm = tail[0];
        let mut degenerate = false;
        for j in 0..i {
            if degenerate {
                theta.push(FRAC_PI_2);
                continue;
            }
            let t = if tail[j] / norm < DEGENERATE_PRODUCT {
                None
            } else {
                let t = tail[j + 1].atan2(row[j]);
                (t < PI).then_some(t)
            };
            match (t, policy) {
                (Some(t), _) => theta.push(t),
                (None, DegeneratePolicy::Fail) => {
                    return Err(Error::DegenerateRow { row: i, col: j })
                }
                (None, DegeneratePolicy::FillOrthogonal) => {
                    degenerate = true;
                    theta.push(FRAC_PI_2);
                }
            }
        }
    }
    Ok(AngleMatrix { dim: k, theta })
}

/// Inverse of [`angles_to_cholesky`] for a factor with unit-norm rows and
/// nonnegative diagonal.
///
/// Uses `θ_ij = atan2(‖b_i[j+1..]‖, b_ij)`, which avoids the loss of
/// precision of `acos` near `0` and `π`.
pub fn cholesky_to_angles(b: &LowerTriangularMatrix) -> Result<AngleMatrix> {
    angles_of_factor(b, DegeneratePolicy::Fail)
}

/// `R = B Bᵀ` with the diagonal set to exactly one.
pub fn corr_from_angles(theta: &AngleMatrix) -> SymmetricMatrix {
    let mut r = angles_to_cholesky(theta).gram();
    for i in 0..r.dim() {
        r.set(i, i, 1.0);
    }
    r
}

/// Angles of a correlation matrix. Rows whose sine product underflows get
/// `π/2` for their remaining, unidentifiable angles.
pub fn angles_from_corr(r: &SymmetricMatrix) -> Result<AngleMatrix> {
    for i in 0..r.dim() {
        let d = r.get(i, i);
        if (d - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "correlation matrix has diagonal entry {d} at {i}"
            )));
        }
    }
    let b = cholesky_decompose(r)?;
    angles_of_factor(&b, DegeneratePolicy::FillOrthogonal)
}

/// Upper end of the pivotal-angle support for a block of `block_size`
/// variables: `arccos(1/(k_u − 1))` for `k_u ≥ 3`, and `π/2` for blocks of
/// one or two variables where that formula is undefined or empty.
pub fn pivotal_support_bound(block_size: usize) -> f64 {
    assert!(block_size >= 1, "block size must be positive");
    if block_size <= 2 {
        FRAC_PI_2
    } else {
        (1.0 / (block_size - 1) as f64).acos()
    }
}

/// Within-block angles of an equicorrelated block of `size` variables with
/// correlation `r`: entry `j` is the angle shared by every row below column
/// `j` of the block.
fn equicorrelated_column_angles(size: usize, r: f64) -> Option<Vec<f64>> {
    let mut angles = Vec::with_capacity(size.saturating_sub(1));
    let mut sumsq = 0.0_f64;
    for _ in 0..size.saturating_sub(1) {
        let d = (1.0 - sumsq).sqrt();
        if !(d > 0.0) {
            return None;
        }
        let c = (r - sumsq) / d;
        let cos = c / d;
        if !(-1.0..=1.0).contains(&cos) {
            return None;
        }
        let t = cos.acos();
        if t >= PI {
            return None;
        }
        angles.push(t);
        sumsq += c * c;
    }
    Some(angles)
}

/// Full angle matrix of the block-diagonal correlation matrix whose block `u`
/// is equicorrelated with `cos θ_u`.
pub fn expand_pivotal(blocks: &BlockStructure, piv: &PivotalAngles) -> Result<AngleMatrix> {
    piv.check_support(blocks.sizes())?;
    let k = blocks.dim();
    let mut theta = vec![FRAC_PI_2; k * k.saturating_sub(1) / 2];
    let mut start = 0;
    for (u, (&size, &t)) in blocks.sizes().iter().zip(&piv.theta).enumerate() {
        let cols = equicorrelated_column_angles(size, t.cos())
            .ok_or(Error::UnsatisfiableAngle { block: u })?;
        for i in start + 1..start + size {
            for j in start..i {
                theta[angle_index(i, j)] = cols[j - start];
            }
        }
        start += size;
    }
    Ok(AngleMatrix { dim: k, theta })
}

/// Smallest `|cos θ₁ − cos θ₂|` over angles in `[0, π]` at distance `δ`.
pub fn separation_lower_bound(delta: f64) -> f64 {
    assert!((0.0..=PI).contains(&delta), "delta must lie in [0, pi]");
    1.0 - delta.cos()
}
