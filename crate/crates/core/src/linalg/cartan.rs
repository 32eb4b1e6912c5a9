use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::matrix::SquareMatrix;
use crate::error::{Error, Result};
use crate::tolerances;

/// Log singular values `log a_i`, non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanVector(Vec<f64>);

impl CartanVector {
    /// Validates the ordering; equal neighbours (walls of the chamber) are fine.
    pub fn new(logs: Vec<f64>) -> Result<Self> {
        if logs.windows(2).any(|w| w[1] > w[0] + 1e-12 * w[0].abs().max(1.0)) {
            return Err(Error::Invalid(format!("Cartan vector {logs:?} is not descending")));
        }
        Ok(Self(logs))
    }

    pub fn logs(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Zero-sum check of the closed Weyl chamber of sl(d).
    pub fn in_chamber(&self, tol: f64) -> bool {
        self.sum().abs() <= tol
    }

    /// `a(g^{-1})` computed from `a(g)`: reversed and negated.
    pub fn of_inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|x| -x).collect())
    }
}

/// `g = k1 * diag(exp a) * k2`.
#[derive(Debug, Clone)]
pub struct CartanDecomposition {
    pub k1: SquareMatrix,
    pub a: CartanVector,
    pub k2: SquareMatrix,
}

impl CartanDecomposition {
    pub fn reconstruct(&self) -> SquareMatrix {
        let s: Vec<f64> = self.a.logs().iter().map(|x| x.exp()).collect();
        &(&self.k1 * &SquareMatrix::diagonal(&s)) * &self.k2
    }
}

/// SVD with singular values in descending order.
#[derive(Debug, Clone)]
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

pub fn svd_sorted(m: &DMatrix<f64>) -> Result<SortedSvd> {
    let (nr, nc) = m.shape();
    let svd = m.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Decomposition("SVD did not return U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Decomposition("SVD did not return V^T".into()))?;
    let s: &DVector<f64> = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let k = s.len();
    let u_sorted = DMatrix::from_fn(nr, k, |i, j| u[(i, order[j])]);
    let vt_sorted = DMatrix::from_fn(k, nc, |i, j| v_t[(order[i], j)]);
    Ok(SortedSvd {
        u: u_sorted,
        singular_values: order.iter().map(|&j| s[j]).collect(),
        v_t: vt_sorted,
    })
}

/// Cartan (polar) decomposition realized by the singular value decomposition.
///
/// Signs are fixed so that `det k1 = +1`; `det k2 = +1` as well whenever
/// `det g > 0`.
pub fn cartan_decompose(g: &SquareMatrix) -> Result<CartanDecomposition> {
    let d = g.dim();
    let SortedSvd { mut u, singular_values, mut v_t } = svd_sorted(g.as_matrix())?;
    let top = singular_values[0];
    let bottom = singular_values[d - 1];
    if !(bottom > tolerances::current().singular_rel * top) {
        return Err(Error::Decomposition(format!(
            "matrix is numerically singular (singular values {top:e} .. {bottom:e})"
        )));
    }
    if u.determinant() < 0.0 {
        u.column_mut(d - 1).neg_mut();
        v_t.row_mut(d - 1).neg_mut();
    }
    if v_t.determinant() < 0.0 && g.det() > 0.0 {
        // only reachable through round-off in a det > 0 input
        v_t.row_mut(d - 1).neg_mut();
        u.column_mut(d - 1).neg_mut();
    }
    let a = CartanVector::new(singular_values.iter().map(|s| s.ln()).collect())?;
    Ok(CartanDecomposition { k1: SquareMatrix::new(u)?, a, k2: SquareMatrix::new(v_t)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_has_zero_cartan_vector() {
        let c = cartan_decompose(&SquareMatrix::identity(3)).unwrap();
        assert!(c.a.logs().iter().all(|x| x.abs() < 1e-15));
        assert!((&c.k1 * &c.k2).max_abs_diff(&SquareMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn diagonal_input() {
        let g = SquareMatrix::diagonal(&[2.0, 0.5]);
        let c = cartan_decompose(&g).unwrap();
        assert_abs_diff_eq!(c.a.logs()[0], 2f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(c.a.logs()[1], -(2f64.ln()), epsilon = 1e-14);
        assert!(c.k1.det() > 0.0 && c.k2.det() > 0.0);
        assert!(c.reconstruct().max_abs_diff(&g) < 1e-12);
    }

    #[test]
    fn swapped_diagonal_needs_a_permutation() {
        let g = SquareMatrix::diagonal(&[0.25, 4.0]);
        let c = cartan_decompose(&g).unwrap();
        assert_abs_diff_eq!(c.a.logs()[0], 4f64.ln(), epsilon = 1e-14);
        assert!(c.reconstruct().max_abs_diff(&g) < 1e-12);
        assert!((c.k1.det() - 1.0).abs() < 1e-12 && (c.k2.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_input_is_rejected() {
        let g = SquareMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(cartan_decompose(&g), Err(Error::Decomposition(_))));
    }

    #[test]
    fn inverse_reverses_and_negates() {
        let g = SquareMatrix::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 1.0, 3.0], &[0.0, 0.5, 1.0]]);
        let a = cartan_decompose(&g).unwrap().a;
        let b = cartan_decompose(&g.inverse().unwrap()).unwrap().a;
        for (x, y) in a.of_inverse().logs().iter().zip(b.logs()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
    }
}
