use super::data::Dataset;
use super::state::Assignment;
use crate::angles::{corr_from_angles, expand_pivotal, BlockStructure, PivotalAngles};
use crate::error::{Error, Result};
use crate::numerics::{
    cholesky_decompose, log_det_from_cholesky, trace_quadratic, SymmetricMatrix,
};

/// Smallest admissible `1 − r` in the closed-form block likelihood, matching
/// the Cholesky pivot tolerance of the reference route.
const MIN_ONE_MINUS_R: f64 = 1e-12;

/// Sufficient statistics of one block: `trace = Σ_{i∈u} S_ii` and
/// `total = Σ_{i,j∈u} S_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStats {
    pub size: usize,
    pub trace: f64,
    pub total: f64,
}

impl BlockStats {
    pub fn of(s: &SymmetricMatrix, members: &[usize]) -> Self {
        let mut trace = 0.0;
        let mut total = 0.0;
        for (a, &i) in members.iter().enumerate() {
            let sii = s.get(i, i);
            trace += sii;
            total += sii;
            for &j in &members[..a] {
                total += 2.0 * s.get(i, j);
            }
        }
        Self {
            size: members.len(),
            trace,
            total,
        }
    }
}

/// Per-block statistics for every cluster of `a`.
pub fn block_stats(data: &Dataset, a: &Assignment) -> Vec<BlockStats> {
    (0..a.m())
        .map(|u| BlockStats::of(data.cross_product(), &a.members(u)))
        .collect()
}

/// Log-likelihood contribution of one equicorrelated block with `r = cos θ`:
/// `−(n/2) log det R_u − ½ tr(S_u R_u⁻¹)`.
pub fn block_log_likelihood(n: usize, stats: &BlockStats, theta: f64) -> Result<f64> {
    if stats.size == 1 {
        return Ok(-0.5 * stats.trace);
    }
    let p = stats.size as f64;
    let r = theta.cos();
    // 1 − cos θ without cancellation near θ = 0.
    let half = (0.5 * theta).sin();
    let one_minus_r = 2.0 * half * half;
    let big = 1.0 + (p - 1.0) * r;
    if one_minus_r <= MIN_ONE_MINUS_R {
        return Err(Error::NotPositiveDefinite {
            pivot: 1,
            value: one_minus_r,
        });
    }
    if big <= MIN_ONE_MINUS_R {
        return Err(Error::NotPositiveDefinite {
            pivot: stats.size - 1,
            value: big,
        });
    }
    let log_det = (p - 1.0) * one_minus_r.ln() + big.ln();
    let trace = (stats.trace - r / big * stats.total) / one_minus_r;
    Ok(-0.5 * n as f64 * log_det - 0.5 * trace)
}

/// `−(n/2) log det R − ½ tr(S R⁻¹)` for the block-equicorrelated `R` implied
/// by the assignment and pivotal angles. Evaluated block by block in closed
/// form.
pub fn log_likelihood(data: &Dataset, a: &Assignment, theta: &PivotalAngles) -> Result<f64> {
    if a.k() != data.k() {
        return Err(Error::DimensionMismatch {
            expected: data.k(),
            got: a.k(),
        });
    }
    theta.check_support(&a.sizes())?;
    block_stats(data, a)
        .iter()
        .zip(&theta.theta)
        .map(|(st, &t)| block_log_likelihood(data.n(), st, t))
        .sum()
}

/// The correlation matrix implied by a (possibly non-contiguous) assignment:
/// the contiguous block matrix from the pivotal angles, conjugated back to
/// the original variable order.
pub fn implied_correlation(a: &Assignment, theta: &PivotalAngles) -> Result<SymmetricMatrix> {
    let order = a.contiguous_order();
    let blocks = BlockStructure::new(a.sizes())?;
    let contiguous = corr_from_angles(&expand_pivotal(&blocks, theta)?);
    let mut position = vec![0; order.len()];
    for (p, &v) in order.iter().enumerate() {
        position[v] = p;
    }
    Ok(contiguous.permuted(&position))
}

/// Same value as [`log_likelihood`], computed through the full angle matrix,
/// a Cholesky factorization and triangular solves.
pub fn log_likelihood_dense(data: &Dataset, a: &Assignment, theta: &PivotalAngles) -> Result<f64> {
    if a.k() != data.k() {
        return Err(Error::DimensionMismatch {
            expected: data.k(),
            got: a.k(),
        });
    }
    let r = implied_correlation(a, theta)?;
    let l = cholesky_decompose(&r)?;
    let log_det = log_det_from_cholesky(&l)?;
    let trace = trace_quadratic(data.cross_product(), &l)?;
    Ok(-0.5 * data.n() as f64 * log_det - 0.5 * trace)
}
