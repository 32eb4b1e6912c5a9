use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::exterior::plucker;
use super::matrix::SquareMatrix;
use crate::error::{Error, Result};
use crate::tolerances;

/// Orthonormal basis of the column span of `m` (thin QR), with the column
/// signs fixed by a positive `R` diagonal.
pub fn orthonormalize(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (d, i) = m.shape();
    if i == 0 || i > d {
        return Err(Error::Invalid(format!("cannot orthonormalize a {d}x{i} frame")));
    }
    let scale = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::DegenerateAction(0.0));
    }
    let qr = (m / scale).qr();
    let r = qr.r();
    let mut q = qr.q();
    let mut min_r = f64::INFINITY;
    for j in 0..i {
        let rjj = r[(j, j)];
        min_r = min_r.min(rjj.abs());
        if rjj < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if !(min_r > tolerances::current().degenerate_action) {
        return Err(Error::DegenerateAction(min_r));
    }
    Ok(q)
}

/// A point of the Grassmannian Gr_i(R^d), stored twice: as an orthonormal
/// `d x i` frame (used for actions) and as the unit Plücker vector in
/// `R^C(d,i)` (used for distances).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrassmannPoint {
    frame: DMatrix<f64>,
    wedge: DVector<f64>,
}

impl GrassmannPoint {
    /// Span of the columns of an arbitrary full-rank `d x i` matrix.
    pub fn from_frame(m: &DMatrix<f64>) -> Result<Self> {
        Self::from_orthonormal(orthonormalize(m)?)
    }

    /// Span of the given vectors.
    pub fn from_vectors(vs: &[&[f64]]) -> Result<Self> {
        let d = vs.first().map(|v| v.len()).ok_or(Error::EmptyMeasure)?;
        if vs.iter().any(|v| v.len() != d) {
            return Err(Error::Invalid("vectors of unequal length".into()));
        }
        Self::from_frame(&DMatrix::from_fn(d, vs.len(), |r, c| vs[c][r]))
    }

    /// `span{e_j : j in idx}` in R^d.
    pub fn coordinate(d: usize, idx: &[usize]) -> Result<Self> {
        let mut m = DMatrix::zeros(d, idx.len());
        for (c, &j) in idx.iter().enumerate() {
            if j >= d {
                return Err(Error::Invalid(format!("basis index {j} out of range for d = {d}")));
            }
            m[(j, c)] = 1.0;
        }
        Self::from_frame(&m)
    }

    /// Rebuilds a point from a stored frame and Plücker vector, checking
    /// that they agree.
    pub(crate) fn from_stored(frame: DMatrix<f64>, wedge: DVector<f64>) -> Result<Self> {
        let fresh = Self::from_frame(&frame)?;
        let t = tolerances::current();
        let p = Self { frame: fresh.frame, wedge };
        if p.wedge.len() != fresh.wedge.len() || wedge_distance(p.wedge.as_slice(), fresh.wedge.as_slice()) > 1e-9 {
            return Err(Error::Invalid("stored Plücker vector does not match its frame".into()));
        }
        if (p.wedge.norm() - 1.0).abs() > t.wedge_norm {
            return Err(Error::Invalid("stored Plücker vector is not a unit vector".into()));
        }
        Ok(p)
    }

    fn from_orthonormal(frame: DMatrix<f64>) -> Result<Self> {
        let mut wedge = plucker(&frame);
        let n = wedge.norm();
        if !(n > 0.0) {
            return Err(Error::DegenerateAction(n));
        }
        wedge /= n;
        // canonical sign: largest coordinate positive
        let imax = wedge.iamax();
        if wedge[imax] < 0.0 {
            wedge.neg_mut();
        }
        Ok(Self { frame, wedge })
    }

    pub fn rank(&self) -> usize {
        self.frame.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn wedge(&self) -> &DVector<f64> {
        &self.wedge
    }

    /// Image `g . xi`: the span of `g` applied to the frame.
    pub fn act(&self, g: &SquareMatrix) -> Result<Self> {
        self.act_raw(g.as_matrix())
    }

    /// As [`act`](Self::act) for a bare matrix (any positive multiple of a
    /// group element acts the same way).
    pub fn act_raw(&self, g: &DMatrix<f64>) -> Result<Self> {
        if g.nrows() != self.ambient_dim() || g.ncols() != self.ambient_dim() {
            return Err(Error::DimensionMismatch(g.nrows(), self.ambient_dim()));
        }
        Self::from_frame(&(g * &self.frame))
    }

    /// Orthogonal complement in R^d (rank `d - i`).
    pub fn orthogonal_complement(&self) -> Result<Self> {
        let d = self.ambient_dim();
        let i = self.rank();
        if i == d {
            return Err(Error::Invalid("the full space has no proper complement".into()));
        }
        let proj = DMatrix::<f64>::identity(d, d) - &self.frame * self.frame.transpose();
        let svd = super::cartan::svd_sorted(&proj)?;
        Self::from_frame(&svd.u.columns(0, d - i).into_owned())
    }

    /// `max |<frame col, other frame col>|`, the orthogonality defect.
    pub fn max_inner_product(&self, other: &Self) -> f64 {
        (self.frame.transpose() * &other.frame).amax()
    }

    /// Checks the stored invariants against the tolerance table.
    pub fn check_invariants(&self) -> bool {
        let t = tolerances::current();
        let i = self.rank();
        let gram = self.frame.transpose() * &self.frame - DMatrix::<f64>::identity(i, i);
        gram.amax() <= t.orthonormal && (self.wedge.norm() - 1.0).abs() <= t.wedge_norm
    }

    /// Span of `frame + t * direction`, used to walk out to spheres around
    /// this point.
    pub(crate) fn perturbed(&self, direction: &DMatrix<f64>, t: f64) -> Result<Self> {
        Self::from_frame(&(&self.frame + direction * t))
    }
}

/// `rho(xi, zeta) = sin angle(xi, zeta)` in the Plücker embedding.
///
/// Evaluated as `sqrt((1 - |c|)(1 + |c|))` with `1 - |c| = |w - s w'|^2 / 2`,
/// which keeps precision for nearby points.
pub fn grassmann_distance(a: &GrassmannPoint, b: &GrassmannPoint) -> Result<f64> {
    if a.rank() != b.rank() {
        return Err(Error::RankMismatch(a.rank(), b.rank()));
    }
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch(a.ambient_dim(), b.ambient_dim()));
    }
    Ok(wedge_distance(a.wedge.as_slice(), b.wedge.as_slice()))
}

/// The same metric on raw unit Plücker vectors of equal length.
pub(crate) fn wedge_distance(a: &[f64], b: &[f64]) -> f64 {
    let c: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let s = if c < 0.0 { -1.0 } else { 1.0 };
    let half_chord: f64 = a.iter().zip(b).map(|(x, y)| (x - s * y).powi(2)).sum::<f64>() * 0.5;
    let one_minus = half_chord.clamp(0.0, 1.0);
    (one_minus * (2.0 - one_minus)).sqrt().min(1.0)
}
