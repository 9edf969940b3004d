use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, SymmetricMatrix};

/// `n × k` observations (rows are subjects, columns are variables) with the
/// cached cross-product `S = Σᵢ yᵢ yᵢᵀ`.
#[derive(Debug, Clone)]
pub struct Dataset {
    y: DenseMatrix,
    s: SymmetricMatrix,
    correlation: SymmetricMatrix,
    labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(y: DenseMatrix, labels: Option<Vec<String>>) -> Result<Self> {
        let (n, k) = (y.rows(), y.cols());
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if k < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 variables, got {k}"
            )));
        }
        if let Some(pos) = y.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at row {}, column {}",
                pos / k,
                pos % k
            )));
        }
        if let Some(l) = &labels {
            if l.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: l.len(),
                });
            }
        }
        let s = y.cross_product();
        let correlation = SymmetricMatrix::from_fn(k, |i, j| {
            if i == j {
                return 1.0;
            }
            let d = (s.get(i, i) * s.get(j, j)).sqrt();
            if d > 0.0 {
                s.get(i, j) / d
            } else {
                0.0
            }
        });
        Ok(Self {
            y,
            s,
            correlation,
            labels,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.y.rows()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.y.cols()
    }

    pub fn observations(&self) -> &DenseMatrix {
        &self.y
    }

    pub fn cross_product(&self) -> &SymmetricMatrix {
        &self.s
    }

    /// Uncentered correlation `S_ij / √(S_ii S_jj)`, consistent with the
    /// zero-mean model.
    pub fn correlation(&self) -> &SymmetricMatrix {
        &self.correlation
    }

    pub fn column_labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Columns centered and scaled to unit variance.
    pub fn standardized(&self) -> Result<Self> {
        Self::new(self.y.standardized(), self.labels.clone())
    }
}
