use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{binomial, wedge_distance, GrassmannPoint};
use crate::walk::apply_steps;

/// Uniformly weighted point cloud on Gr_i(R^d).
///
/// Distances come from the stored unit Plücker vectors, which are also kept
/// in one flat buffer so ball queries are a linear scan over contiguous
/// memory. All balls are closed: a point at distance exactly `r` counts.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalMeasure {
    rank: usize,
    d: usize,
    width: usize,
    #[serde(skip)]
    points: Vec<GrassmannPoint>,
    wedges: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn from_points(rank: usize, points: Vec<GrassmannPoint>) -> Result<Self> {
        let d = points.first().map(|p| p.ambient_dim()).unwrap_or(0);
        let width = if d == 0 { 0 } else { binomial(d, rank) };
        let mut wedges = Vec::with_capacity(points.len() * width);
        for p in &points {
            if p.rank() != rank {
                return Err(Error::RankMismatch(p.rank(), rank));
            }
            if p.ambient_dim() != d {
                return Err(Error::DimensionMismatch(p.ambient_dim(), d));
            }
            wedges.extend_from_slice(p.wedge().as_slice());
        }
        Ok(Self { rank, d, width, points, wedges })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    /// Length of the Plücker vectors, `C(d, i)`.
    pub fn wedge_len(&self) -> usize {
        self.width
    }

    /// Real dimension of the Grassmannian, `i (d - i)`.
    pub fn manifold_dim(&self) -> usize {
        self.rank * (self.d - self.rank)
    }

    pub fn points(&self) -> &[GrassmannPoint] {
        &self.points
    }

    pub fn point(&self, j: usize) -> &GrassmannPoint {
        &self.points[j]
    }

    pub fn wedge(&self, j: usize) -> &[f64] {
        &self.wedges[j * self.width..(j + 1) * self.width]
    }

    pub fn wedges(&self) -> &[f64] {
        &self.wedges
    }

    /// Distances from a unit Plücker vector to every sample point.
    pub fn distances_from(&self, z: &[f64]) -> Vec<f64> {
        self.wedges.chunks_exact(self.width).map(|w| wedge_distance(z, w)).collect()
    }

    /// Number of points in the closed ball `B(z, r)`.
    pub fn ball_count(&self, z: &[f64], r: f64) -> usize {
        self.wedges.chunks_exact(self.width).filter(|w| wedge_distance(z, w) <= r).count()
    }

    pub fn ball_mass(&self, z: &GrassmannPoint, r: f64) -> Result<f64> {
        if z.rank() != self.rank {
            return Err(Error::RankMismatch(z.rank(), self.rank));
        }
        if self.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        Ok(self.ball_count(z.wedge().as_slice(), r) as f64 / self.len() as f64)
    }

    /// Leave-one-out count of other sample points in the closed ball around point `j`.
    pub fn ball_count_loo(&self, j: usize, r: f64) -> usize {
        let z = self.wedge(j);
        self.wedges
            .chunks_exact(self.width)
            .enumerate()
            .filter(|&(l, w)| l != j && wedge_distance(z, w) <= r)
            .count()
    }

    /// Images of all points under the linear map `ext` on Plücker vectors
    /// (`ext = wedge^i g`), renormalized, flattened.
    pub fn push_forward_wedges(&self, ext: &DMatrix<f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.wedges.len());
        for w in self.wedges.chunks_exact(self.width) {
            apply_normalized(ext, w, &mut out);
        }
        out
    }

    /// Images of all points under an atom given by its steps in product
    /// order (see [`WalkMeasure::steps`](crate::walk::WalkMeasure::steps)),
    /// applied one step at a time.
    pub fn push_forward_steps(&self, steps: &[DMatrix<f64>]) -> Vec<f64> {
        if let [single] = steps {
            return self.push_forward_wedges(single);
        }
        self.wedges.chunks_exact(self.width).flat_map(|w| apply_steps(steps, w).0).collect()
    }
}

/// Appends `normalize(m * w)` to `out`.
pub(crate) fn apply_normalized(m: &DMatrix<f64>, w: &[f64], out: &mut Vec<f64>) {
    let start = out.len();
    let mut norm2 = 0.0;
    for r in 0..m.nrows() {
        let v: f64 = (0..m.ncols()).map(|c| m[(r, c)] * w[c]).sum();
        norm2 += v * v;
        out.push(v);
    }
    let inv = 1.0 / norm2.sqrt();
    for x in &mut out[start..] {
        *x *= inv;
    }
}
