use super::matrix::{LowerTriangularMatrix, SymmetricMatrix};
use crate::error::{Error, Result};

/// Relative pivot tolerance for [`cholesky_decompose`].
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Diagonal entries at or below this (relative to `max(1, max |lᵢᵢ|)`) count
/// as singular in triangular solves.
pub const SINGULAR_TOLERANCE: f64 = 1e-14;

/// Cholesky factor `L` with `L Lᵀ = a`.
///
/// Fails with [`Error::NotPositiveDefinite`] when a pivot (the squared
/// diagonal before the square root) falls to `1e-12 · max diag` or below.
pub fn cholesky_decompose(a: &SymmetricMatrix) -> Result<LowerTriangularMatrix> {
    let n = a.dim();
    let mut l = LowerTriangularMatrix::zeros(n);
    if n == 0 {
        return Ok(l);
    }
    let max_diag = a.max_diagonal();
    if !(max_diag > 0.0) {
        return Err(Error::NotPositiveDefinite {
            pivot: 0,
            value: max_diag,
        });
    }
    let tol = PIVOT_TOLERANCE * max_diag;

    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = {
                let (ri, rj) = (&l.row(i)[..j], &l.row(j)[..j]);
                ri.iter().zip(rj).map(|(x, y)| x * y).sum()
            };
            let s = a.get(i, j) - dot;
            if i == j {
                if !(s > tol) {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                }
                l.set(i, i, s.sqrt());
            } else {
                let v = s / l.get(j, j);
                l.set(i, j, v);
            }
        }
    }
    Ok(l)
}

fn check_diagonal(l: &LowerTriangularMatrix) -> Result<()> {
    let scale = (0..l.dim())
        .map(|i| l.get(i, i).abs())
        .fold(1.0_f64, f64::max);
    for i in 0..l.dim() {
        let d = l.get(i, i);
        if !(d > SINGULAR_TOLERANCE * scale) {
            return Err(Error::SingularMatrix { index: i, value: d });
        }
    }
    Ok(())
}

/// Forward substitution for `l x = b`.
pub fn solve_lower(l: &LowerTriangularMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            got: b.len(),
        });
    }
    check_diagonal(l)?;
    Ok(forward_substitute(l, b))
}

fn forward_substitute(l: &LowerTriangularMatrix, b: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(b.len());
    for (i, &bi) in b.iter().enumerate() {
        let row = l.row(i);
        let dot: f64 = row[..i].iter().zip(&x).map(|(a, b)| a * b).sum();
        x.push((bi - dot) / row[i]);
    }
    x
}

/// `log det(L Lᵀ) = 2 Σ log lᵢᵢ`.
pub fn log_det_from_cholesky(l: &LowerTriangularMatrix) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..l.dim() {
        let d = l.get(i, i);
        if !(d > 0.0) {
            return Err(Error::SingularMatrix { index: i, value: d });
        }
        acc += d.ln();
    }
    Ok(2.0 * acc)
}

/// `tr(S R⁻¹)` where `R = r_chol r_cholᵀ`, via two rounds of triangular
/// solves: `tr(S R⁻¹) = tr(L⁻¹ (L⁻¹ S)ᵀ)` for symmetric `S`.
pub fn trace_quadratic(s: &SymmetricMatrix, r_chol: &LowerTriangularMatrix) -> Result<f64> {
    let k = s.dim();
    if r_chol.dim() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: r_chol.dim(),
        });
    }
    check_diagonal(r_chol)?;

    // m[c] = L⁻¹ S[:, c], stored by column.
    let m: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let col: Vec<f64> = (0..k).map(|r| s.get(r, c)).collect();
            forward_substitute(r_chol, &col)
        })
        .collect();
    // Only the diagonal of L⁻¹ Mᵀ is needed; column c of Mᵀ is row c of M.
    let mut trace = 0.0;
    for c in 0..k {
        let col: Vec<f64> = (0..k).map(|r| m[r][c]).collect();
        let x = forward_substitute(r_chol, &col);
        trace += x[c];
    }
    Ok(trace)
}
