use crate::error::{Error, Result};

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    debug_assert!(j <= i);
    i * (i + 1) / 2 + j
}

/// Symmetric matrix with each off-diagonal pair stored once (packed lower
/// triangle, row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on the lower triangle only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds from a dense square matrix, requiring exact symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            for j in 0..i {
                if row[j] != rows[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j <= i {
            self.data[packed_index(i, j)]
        } else {
            self.data[packed_index(j, i)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let idx = if j <= i {
            packed_index(i, j)
        } else {
            packed_index(j, i)
        };
        self.data[idx] = value;
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.get(i, i))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Symmetric permutation: `result[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim);
        Self::from_fn(self.dim, |i, j| self.get(perm[i], perm[j]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `D^{-1/2} A D^{-1/2}` with `D = diag(A)`.
    pub fn to_correlation(&self) -> Result<Self> {
        let scale: Vec<f64> = (0..self.dim)
            .map(|i| {
                let d = self.get(i, i);
                if d > 0.0 {
                    Ok(d.sqrt().recip())
                } else {
                    Err(Error::InvalidInput(format!(
                        "nonpositive diagonal entry {d} at index {i}"
                    )))
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self::from_fn(self.dim, |i, j| {
            if i == j {
                1.0
            } else {
                self.get(i, j) * scale[i] * scale[j]
            }
        }))
    }
}

/// Lower-triangular matrix in packed row-major storage; rows are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangularMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl LowerTriangularMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds from dense rows; entries above the diagonal must be zero.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row[i + 1..].iter().any(|&v| v != 0.0) {
                return Err(Error::InvalidInput(format!(
                    "row {i} has nonzero entries above the diagonal"
                )));
            }
            m.row_mut(i).copy_from_slice(&row[..=i]);
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.data[packed_index(i, j)]
        }
    }

    /// Panics when `j > i`: the upper triangle is structurally zero.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(j <= i, "cannot write above the diagonal");
        self.data[packed_index(i, j)] = value;
    }

    /// Entries `0..=i` of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let start = packed_index(i, 0);
        &self.data[start..start + i + 1]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let start = packed_index(i, 0);
        &mut self.data[start..start + i + 1]
    }

    /// `L Lᵀ`.
    pub fn gram(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(self.dim, |i, j| {
            let (ri, rj) = (self.row(i), self.row(j));
            ri[..=j].iter().zip(rj).map(|(a, b)| a * b).sum()
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Row-major dense matrix used for observation tables.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Columns as separate vectors (the transposed data matrix).
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// `Σᵢ yᵢ yᵢᵀ` over the rows.
    pub fn cross_product(&self) -> SymmetricMatrix {
        let mut s = SymmetricMatrix::zeros(self.cols);
        for r in 0..self.rows {
            let y = self.row(r);
            for i in 0..self.cols {
                for j in 0..=i {
                    let v = s.get(i, j) + y[i] * y[j];
                    s.set(i, j, v);
                }
            }
        }
        s
    }

    /// Sample correlation of the columns (centered).
    pub fn column_correlation(&self) -> SymmetricMatrix {
        let centered = self.standardized();
        let mut c = centered.cross_product();
        let n = self.rows as f64;
        for i in 0..self.cols {
            for j in 0..=i {
                let v = if i == j { 1.0 } else { c.get(i, j) / n };
                c.set(i, j, v);
            }
        }
        c
    }

    /// Centers every column and scales it to unit (population) variance.
    /// Constant columns are centered only.
    pub fn standardized(&self) -> Self {
        let n = self.rows as f64;
        let mut out = self.clone();
        for j in 0..self.cols {
            let mean = (0..self.rows).map(|i| self.get(i, j)).sum::<f64>() / n;
            let var = (0..self.rows)
                .map(|i| (self.get(i, j) - mean).powi(2))
                .sum::<f64>()
                / n;
            let scale = if var > 0.0 { var.sqrt().recip() } else { 1.0 };
            for i in 0..self.rows {
                out.set(i, j, (self.get(i, j) - mean) * scale);
            }
        }
        out
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}
