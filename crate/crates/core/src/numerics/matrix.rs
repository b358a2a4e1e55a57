//! Dense row-major matrix type shared by all modules.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense matrix of finite `f64` entries in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct Matrix {
    pub(crate) a: Array2<f64>,
}

#[derive(Serialize, Deserialize, Clone)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<MatrixRepr> for Matrix {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<Matrix> {
        Matrix::from_vec(r.rows, r.cols, r.data)
    }
}

impl From<Matrix> for MatrixRepr {
    fn from(m: Matrix) -> MatrixRepr {
        MatrixRepr {
            rows: m.rows(),
            cols: m.cols(),
            data: m.to_vec(),
        }
    }
}

impl Matrix {
    /// Builds a matrix from row-major entries. Fails when the entry count
    /// does not equal `rows * cols` or any entry is non-finite.
    pub fn from_vec(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Matrix> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "entry {i} of a {rows}x{cols} matrix"
            )));
        }
        let a = Array2::from_shape_vec((rows, cols), entries)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Ok(Matrix { a })
    }

    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            a: Array2::zeros((rows, cols)),
        }
    }

    pub fn identity(n: usize) -> Matrix {
        Matrix {
            a: Array2::eye(n),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Matrix {
        Matrix {
            a: Array2::from_shape_fn((rows, cols), |(i, j)| f(i, j)),
        }
    }

    pub(crate) fn from_array(a: Array2<f64>) -> Matrix {
        Matrix { a }
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[(i, j)] = v;
    }

    /// View of row `i`.
    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.a.row(i)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.a.view()
    }

    /// Row-major copy of all entries.
    pub fn to_vec(&self) -> Vec<f64> {
        self.a.iter().copied().collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix {
            a: self.a.t().to_owned(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Matrix {
            a: self.a.dot(&other.a),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Max absolute asymmetry `|A - A^T|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.rows().min(self.cols());
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.a[(i, j)] - self.a[(j, i)]).abs());
            }
        }
        worst
    }

    /// New matrix keeping only the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Matrix> {
        for &c in cols {
            if c >= self.cols() {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    d: self.cols(),
                });
            }
        }
        let mut out = Array2::zeros((self.rows(), cols.len()));
        for (k, &c) in cols.iter().enumerate() {
            out.column_mut(k).assign(&self.a.column(c));
        }
        Ok(Matrix { a: out })
    }

    /// New matrix keeping only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Matrix> {
        for &r in rows {
            if r >= self.rows() {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    d: self.rows(),
                });
            }
        }
        let mut out = Array2::zeros((rows.len(), self.cols()));
        for (k, &r) in rows.iter().enumerate() {
            out.row_mut(k).assign(&self.a.row(r));
        }
        Ok(Matrix { a: out })
    }
}

/// Eigenvalues (descending) with matching unit-norm eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_validates_entry_count() {
        let err = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn from_vec_rejects_non_finite() {
        let err = Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn row_major_layout() {
        let m = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(m.get(0, 2), 3.0);
        assert_eq!(m.get(1, 0), 4.0);
        assert_eq!(m.to_vec(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn select_columns_reorders() {
        let m = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let s = m.select_columns(&[2, 0]).unwrap();
        assert_eq!(s.to_vec(), vec![3.0, 1.0, 6.0, 4.0]);
        assert!(m.select_columns(&[3]).is_err());
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = Matrix::from_vec(2, 2, vec![1.0, 2.5, -3.0, 4.0]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: Matrix = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
    }
}
