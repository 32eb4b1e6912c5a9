use nalgebra::DMatrix;

use super::matrix::{op_norm, SquareMatrix};
use crate::error::{Error, Result};
use crate::tolerances;

/// A matrix stored as `exp(log_scale) * unit` with `unit` of Frobenius norm 1.
///
/// Long random products overflow long before their direction stops being
/// informative, so products are renormalized after every multiplication.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    unit: DMatrix<f64>,
    log_scale: f64,
}

impl ScaledMatrix {
    pub fn identity(d: usize) -> Self {
        let mut unit = DMatrix::identity(d, d);
        let f = unit.norm();
        unit /= f;
        Self { unit, log_scale: f.ln() }
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let mut s = Self { unit: m.clone(), log_scale: 0.0 };
        s.renormalize()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.unit.nrows()
    }

    pub fn unit(&self) -> &DMatrix<f64> {
        &self.unit
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `self <- self * rhs`.
    pub fn mul_right(&mut self, rhs: &DMatrix<f64>) -> Result<()> {
        self.unit = &self.unit * rhs;
        self.renormalize()
    }

    /// `self <- lhs * self`.
    pub fn mul_left(&mut self, lhs: &DMatrix<f64>) -> Result<()> {
        self.unit = lhs * &self.unit;
        self.renormalize()
    }

    /// Natural log of the operator norm of the represented matrix.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + op_norm(&self.unit).ln()
    }

    /// The represented matrix; overflows to infinity for large scales.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        &self.unit * self.log_scale.exp()
    }

    pub fn to_square(&self) -> Result<SquareMatrix> {
        SquareMatrix::new(self.to_matrix())
    }

    fn renormalize(&mut self) -> Result<()> {
        let f = self.unit.norm();
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::Numeric(format!("running product has norm {f}")));
        }
        self.unit /= f;
        self.log_scale += f.ln();
        if self.log_scale.abs() > tolerances::current().log_scale_max {
            return Err(Error::Instability(self.log_scale));
        }
        Ok(())
    }
}
