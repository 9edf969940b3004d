//! Synthetic datasets with known variable clusters, and the recovery score.

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::numerics::{cholesky_decompose, sample_mvn_zero, RngStream, SymmetricMatrix};
use pathfinding::prelude::{kuhn_munkres, Matrix};
use rand::seq::SliceRandom;

const MAX_DESIGN_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum DesignKind {
    /// Latent-factor design `Σ = A C Aᵀ + Γ` with `C = BᵀB`, balanced
    /// clusters of size `k/m`.
    Bunea,
    /// Block-diagonal `R` whose block `u` has `sizes[u]` variables and common
    /// correlation `rs[u]`.
    BlockEquicorr { sizes: Vec<usize>, rs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimDesign {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub kind: DesignKind,
}

impl SimDesign {
    pub fn bunea(k: usize, m: usize, n: usize, seed: u64) -> Self {
        Self {
            k,
            m,
            n,
            seed,
            kind: DesignKind::Bunea,
        }
    }

    /// Block-equicorrelated design with explicit block sizes.
    pub fn block_equicorr(sizes: Vec<usize>, rs: Vec<f64>, n: usize, seed: u64) -> Self {
        Self {
            k: sizes.iter().sum(),
            m: sizes.len(),
            n,
            seed,
            kind: DesignKind::BlockEquicorr { sizes, rs },
        }
    }

    /// `m` blocks of near-equal size (the first `k mod m` get one extra) with
    /// one shared correlation.
    pub fn balanced_blocks(k: usize, m: usize, r: f64, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || m > k {
            return Err(Error::Config(format!("m = {m} must lie in 1..={k}")));
        }
        let sizes = (0..m).map(|u| k / m + usize::from(u < k % m)).collect();
        Ok(Self::block_equicorr(sizes, vec![r; m], n, seed))
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || self.n < 2 {
            return Err(Error::Config(format!(
                "need k >= 2 and n >= 2, got k = {}, n = {}",
                self.k, self.n
            )));
        }
        if self.m == 0 || self.m > self.k {
            return Err(Error::Config(format!(
                "m = {} must lie in 1..={}",
                self.m, self.k
            )));
        }
        match &self.kind {
            DesignKind::Bunea => {
                if !self.k.is_multiple_of(self.m) {
                    return Err(Error::Config(format!(
                        "k = {} is not divisible by m = {}",
                        self.k, self.m
                    )));
                }
            }
            DesignKind::BlockEquicorr { sizes, rs } => {
                if sizes.len() != self.m || rs.len() != self.m {
                    return Err(Error::Config(
                        "one size and one correlation per block required".into(),
                    ));
                }
                if sizes.contains(&0) || sizes.iter().sum::<usize>() != self.k {
                    return Err(Error::Config(format!(
                        "block sizes {sizes:?} must be positive and sum to k"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Cluster id of each variable, `0..m`.
    pub labels: Vec<usize>,
    pub r: SymmetricMatrix,
}

fn column_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("V{i}")).collect()
}

fn contiguous_labels(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(u, &s)| std::iter::repeat_n(u, s))
        .collect()
}

fn draw(r: &SymmetricMatrix, n: usize, stream: &mut RngStream) -> Result<Dataset> {
    let l = cholesky_decompose(r)?;
    Dataset::new(sample_mvn_zero(stream, &l, n), Some(column_names(r.dim())))
}

/// Latent-factor design: `B` is `(m−1) × m` with entries `−1, 0, 1` drawn with
/// probabilities `m^{−1/2}/2, 1 − m^{−1/2}, m^{−1/2}/2`; `C = BᵀB`; `A` the
/// balanced membership matrix; `Γ` a random permutation of the grid
/// `0.5, 0.5 + 1.5/(k−1), …, 2`. Data are `N(0, R)` with `R` the correlation
/// matrix of `Σ = A C Aᵀ + Γ`.
pub fn gen_bunea_design(
    design: &SimDesign,
    stream: &mut RngStream,
) -> Result<(Dataset, GroundTruth)> {
    design.validate()?;
    if design.kind != DesignKind::Bunea {
        return Err(Error::Config("expected a latent-factor design".into()));
    }
    let (k, m) = (design.k, design.m);
    let labels = contiguous_labels(&vec![k / m; m]);
    let mut gamma: Vec<f64> = (0..k)
        .map(|i| 0.5 + 1.5 * i as f64 / (k - 1) as f64)
        .collect();
    gamma.shuffle(stream);
    let p_nonzero = 1.0 / (m as f64).sqrt();
    for _ in 0..MAX_DESIGN_DRAWS {
        let b: Vec<Vec<f64>> = (0..m.saturating_sub(1))
            .map(|_| {
                (0..m)
                    .map(|_| {
                        let u = stream.open01();
                        if u < 0.5 * p_nonzero {
                            -1.0
                        } else if u < p_nonzero {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let c = SymmetricMatrix::from_fn(m, |u, v| b.iter().map(|row| row[u] * row[v]).sum());
        let sigma = SymmetricMatrix::from_fn(k, |i, j| {
            c.get(labels[i], labels[j]) + if i == j { gamma[i] } else { 0.0 }
        });
        if cholesky_decompose(&sigma).is_err() {
            continue;
        }
        let r = sigma.to_correlation()?;
        let data = draw(&r, design.n, stream)?;
        return Ok((data, GroundTruth { labels, r }));
    }
    Err(Error::DegenerateDesign {
        attempts: MAX_DESIGN_DRAWS,
    })
}

/// Block-diagonal correlation matrix with equicorrelated blocks laid out
/// contiguously.
pub fn block_equicorr_matrix(sizes: &[usize], rs: &[f64]) -> SymmetricMatrix {
    let labels = contiguous_labels(sizes);
    SymmetricMatrix::from_fn(labels.len(), |i, j| {
        if i == j {
            1.0
        } else if labels[i] == labels[j] {
            rs[labels[i]]
        } else {
            0.0
        }
    })
}

/// Data from `N(0, R)` with `R` block-diagonal and equicorrelated per block.
pub fn gen_block_equicorr(
    design: &SimDesign,
    stream: &mut RngStream,
) -> Result<(Dataset, GroundTruth)> {
    design.validate()?;
    let DesignKind::BlockEquicorr { sizes, rs } = &design.kind else {
        return Err(Error::Config(
            "expected a block-equicorrelated design".into(),
        ));
    };
    let r = block_equicorr_matrix(sizes, rs);
    let data = draw(&r, design.n, stream)?;
    Ok((
        data,
        GroundTruth {
            labels: contiguous_labels(sizes),
            r,
        },
    ))
}

/// Dispatches on the design kind with a stream seeded from `design.seed`.
pub fn simulate(design: &SimDesign) -> Result<(Dataset, GroundTruth)> {
    let mut stream = RngStream::new(design.seed);
    match design.kind {
        DesignKind::Bunea => gen_bunea_design(design, &mut stream),
        DesignKind::BlockEquicorr { .. } => gen_block_equicorr(design, &mut stream),
    }
}

/// `table[a][b]` = number of variables with estimated id `a` and true id `b`;
/// ids are compacted in order of first appearance.
pub fn contingency_table(estimated: &[usize], truth: &[usize]) -> Result<Vec<Vec<usize>>> {
    if estimated.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: estimated.len(),
            right: truth.len(),
        });
    }
    let est = crate::baselines::hierarchical::first_appearance_labels(estimated);
    let tru = crate::baselines::hierarchical::first_appearance_labels(truth);
    let rows = est.iter().max().map_or(0, |v| v + 1);
    let cols = tru.iter().max().map_or(0, |v| v + 1);
    let mut table = vec![vec![0usize; cols]; rows];
    for (&a, &b) in est.iter().zip(&tru) {
        table[a][b] += 1;
    }
    Ok(table)
}

/// Fraction of variables placed in their true cluster under the best
/// one-to-one matching of estimated to true cluster ids.
pub fn recovery(estimated: &[usize], truth: &[usize]) -> Result<f64> {
    let table = contingency_table(estimated, truth)?;
    if truth.is_empty() {
        return Err(Error::InvalidInput("empty labelings".into()));
    }
    let size = table.len().max(table[0].len());
    let weights = Matrix::from_fn(size, size, |(a, b)| {
        table
            .get(a)
            .and_then(|row| row.get(b))
            .map_or(0i64, |&c| c as i64)
    });
    let (matched, _) = kuhn_munkres(&weights);
    Ok(matched as f64 / truth.len() as f64)
}
