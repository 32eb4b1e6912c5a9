use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::grassmann::{orthonormalize, GrassmannPoint};
use super::matrix::SquareMatrix;
use crate::error::{Error, Result};

/// A full flag `V_1 < V_2 < ... < V_{d-1}`, with `V_i` spanned by the first
/// `i` columns of an orthonormal frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    frame: DMatrix<f64>,
}

impl Flag {
    /// The standard flag built on `e_1, e_2, ...`.
    pub fn standard(d: usize) -> Self {
        Self { frame: DMatrix::identity(d, d) }
    }

    /// Gram-Schmidt of the given columns; `k . V_0` for orthogonal `k` is
    /// `Flag::from_frame(k)`.
    pub fn from_frame(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Invalid("flag frame must be square".into()));
        }
        Ok(Self { frame: orthonormalize(m)? })
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn act(&self, g: &SquareMatrix) -> Result<Self> {
        Self::from_frame(&(g.as_matrix() * &self.frame))
    }

    /// Subspace of dimension `i`. Rank `d` (the whole space) is accepted for
    /// callers that treat the top exterior power uniformly.
    pub fn project(&self, i: usize) -> Result<GrassmannPoint> {
        let d = self.dim();
        if i == 0 || i > d {
            return Err(Error::RankOutOfRange { rank: i, max: d - 1, d });
        }
        GrassmannPoint::from_frame(&self.frame.columns(0, i).into_owned())
    }
}

/// `pi_i(V)` for `1 <= i <= d-1`.
pub fn flag_project(v: &Flag, i: usize) -> Result<GrassmannPoint> {
    let d = v.dim();
    if i == 0 || i >= d {
        return Err(Error::RankOutOfRange { rank: i, max: d - 1, d });
    }
    v.project(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::grassmann_distance;

    #[test]
    fn standard_projections() {
        let f = Flag::standard(4);
        for i in 1..4 {
            let idx: Vec<usize> = (0..i).collect();
            let p = flag_project(&f, i).unwrap();
            let e = GrassmannPoint::coordinate(4, &idx).unwrap();
            assert!(grassmann_distance(&p, &e).unwrap() < 1e-15);
        }
        assert!(flag_project(&f, 4).is_err());
        assert!(flag_project(&f, 0).is_err());
    }

    #[test]
    fn rotated_flag_projects_to_leading_columns() {
        let k = SquareMatrix::rotation(3, 0, 2, 0.7);
        let f = Flag::standard(3).act(&k).unwrap();
        let p = flag_project(&f, 2).unwrap();
        let direct = GrassmannPoint::from_frame(&k.as_matrix().columns(0, 2).into_owned()).unwrap();
        assert!(grassmann_distance(&p, &direct).unwrap() < 1e-14);
    }

    #[test]
    fn projections_are_nested() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, -1.0, 0.3, 2.0, 0.2, 1.0, 1.0]);
        let f = Flag::from_frame(&m).unwrap();
        let p1 = flag_project(&f, 1).unwrap();
        let p2 = flag_project(&f, 2).unwrap();
        // the V_1 vector lies in V_2: its projection onto V_2 has unit length
        let v = p1.frame().column(0);
        let proj = p2.frame().transpose() * v;
        assert!((proj.norm() - 1.0).abs() < 1e-12);
    }
}
