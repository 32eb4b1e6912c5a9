//! Sample clouds with known dimension, used to calibrate the estimators.

use std::f64::consts::{PI, TAU};

use crate::error::Result;
use crate::harmonic::EmpiricalMeasure;
use crate::linalg::GrassmannPoint;
use crate::walk::{domain, Stream};

/// Ternary digits drawn per Cantor sample; `3^-40` is far below any usable radius.
const CANTOR_DIGITS: usize = 40;

fn line2(theta: f64) -> Result<GrassmannPoint> {
    GrassmannPoint::from_vectors(&[&[theta.cos(), theta.sin()]])
}

/// Uniform sample of the circle of lines in `Gr_1(R^3)` at angle `alpha`
/// from the third axis (dimension 1).
pub fn circle(n: usize, alpha: f64, seed: u64) -> Result<EmpiricalMeasure> {
    let mut s = Stream::new(seed, domain::REFERENCE, 1);
    let pts = (0..n)
        .map(|_| {
            let t = TAU * s.uniform();
            GrassmannPoint::from_vectors(&[&[alpha.sin() * t.cos(), alpha.sin() * t.sin(), alpha.cos()]])
        })
        .collect::<Result<_>>()?;
    EmpiricalMeasure::from_points(1, pts)
}

/// Middle-thirds Cantor measure on `[0, 1]` mapped to lines in `Gr_1(R^2)`
/// at angle `x * pi / 3` (dimension `log 2 / log 3`; the map is bi-Lipschitz
/// for the sine-of-angle metric).
pub fn cantor(n: usize, seed: u64) -> Result<EmpiricalMeasure> {
    let mut s = Stream::new(seed, domain::REFERENCE, 2);
    let pts = (0..n)
        .map(|_| {
            let mut x = 0.0;
            let mut scale = 1.0;
            for _ in 0..CANTOR_DIGITS {
                scale /= 3.0;
                if s.uniform() < 0.5 {
                    x += 2.0 * scale;
                }
            }
            line2(x * PI / 3.0)
        })
        .collect::<Result<_>>()?;
    EmpiricalMeasure::from_points(1, pts)
}

/// Half the points on the circle benchmark, half on one atom off the circle.
pub fn mixture(n: usize, seed: u64) -> Result<EmpiricalMeasure> {
    let half = circle(n / 2, PI / 4.0, seed)?;
    let atom = GrassmannPoint::coordinate(3, &[0])?;
    let mut pts = half.points().to_vec();
    pts.extend(std::iter::repeat_n(atom, n - n / 2));
    EmpiricalMeasure::from_points(1, pts)
}

/// `n` copies of the first coordinate line in `R^d`.
pub fn atom(n: usize, d: usize) -> EmpiricalMeasure {
    let p = GrassmannPoint::coordinate(d, &[0]).expect("coordinate line");
    EmpiricalMeasure::from_points(1, vec![p; n]).expect("uniform rank")
}

pub const CANTOR_DIMENSION: f64 = std::f64::consts::LN_2 / 1.098_612_288_668_109_8;
