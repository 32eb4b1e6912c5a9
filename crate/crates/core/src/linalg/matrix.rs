use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::ops::Mul;

use crate::error::{Error, Result};

/// A real square matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Invalid(format!(
                "matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    /// Builds a matrix from rows. Panics on ragged input; meant for literals.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let d = rows.len();
        assert!(rows.iter().all(|r| r.len() == d), "rows must form a square");
        Self(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let d = entries.len();
        Self(DMatrix::from_fn(d, d, |i, j| if i == j { entries[i] } else { 0.0 }))
    }

    /// Rotation by `angle` in the (e_p, e_q) plane of R^d.
    pub fn rotation(d: usize, p: usize, q: usize, angle: f64) -> Self {
        let mut m = DMatrix::identity(d, d);
        let (s, c) = angle.sin_cos();
        m[(p, p)] = c;
        m[(q, q)] = c;
        m[(p, q)] = -s;
        m[(q, p)] = s;
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn inverse(&self) -> Result<Self> {
        self.0
            .clone()
            .try_inverse()
            .map(Self)
            .ok_or_else(|| Error::Decomposition("matrix is not invertible".into()))
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    /// Euclidean operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        op_norm(&self.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        (&self.0 - &other.0).amax()
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (self.0.transpose() * &self.0 - DMatrix::<f64>::identity(d, d)).amax() <= tol
    }

    /// Checks membership in SL(d,R) up to `tol` on the determinant.
    pub fn is_unimodular(&self, tol: f64) -> bool {
        (self.det() - 1.0).abs() <= tol
    }
}

pub(crate) fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].abs();
    }
    m.singular_values().max()
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: SquareMatrix) -> SquareMatrix {
        SquareMatrix(self.0 * rhs.0)
    }
}

impl From<SquareMatrix> for DMatrix<f64> {
    fn from(m: SquareMatrix) -> Self {
        m.0
    }
}
