use nalgebra::DMatrix;

use super::measure::{product_steps, StepTable, WalkMeasure};
use super::rng::{domain, Stream};
use crate::error::Result;
use crate::linalg::ScaledMatrix;

/// A sample path prefix `x_n = h_1 h_2 ... h_n` held up to scale.
#[derive(Debug, Clone)]
pub struct PathState {
    pub n: usize,
    pub product: ScaledMatrix,
    /// Atom indices of `h_1, ..., h_n` when retained.
    pub increments: Option<Vec<usize>>,
}

impl PathState {
    /// The retained increments as matrices, in order.
    pub fn increment_matrices<'a>(&self, atoms: &'a [DMatrix<f64>]) -> Option<Vec<&'a DMatrix<f64>>> {
        self.increments.as_ref().map(|idx| idx.iter().map(|&j| &atoms[j]).collect())
    }
}

/// Atom indices of the first `n` increments of a path in the given domain.
pub fn increment_indices(mu: &WalkMeasure, stream_domain: u64, n: usize, sample_index: u64, seed: u64) -> Vec<usize> {
    let mut s = Stream::new(seed, stream_domain, sample_index);
    (0..n).map(|_| mu.index_for(s.uniform())).collect()
}

fn run(table: &StepTable, idx: Vec<usize>, retain: bool, d: usize) -> Result<PathState> {
    let mut product = ScaledMatrix::identity(d);
    for step in product_steps(table, &idx) {
        product.mul_right(step)?;
    }
    Ok(PathState { n: idx.len(), product, increments: retain.then_some(idx) })
}

/// `x_n = h_1 ... h_n` with `h_m ~ mu` drawn from the forward stream of
/// `sample_index`.
pub fn forward_product(mu: &WalkMeasure, n: usize, sample_index: u64, seed: u64) -> Result<PathState> {
    forward_product_with(mu, n, sample_index, seed, false)
}

pub fn forward_product_with(
    mu: &WalkMeasure,
    n: usize,
    sample_index: u64,
    seed: u64,
    retain: bool,
) -> Result<PathState> {
    let idx = increment_indices(mu, domain::FORWARD, n, sample_index, seed);
    run(mu.steps(), idx, retain, mu.dim())
}

/// The negative half `x_{-n}` of a bilateral path: a walk with increments
/// drawn from the reflected measure on an independent stream. Retained
/// indices refer to [`WalkMeasure::inverses`].
pub fn backward_product(mu: &WalkMeasure, n: usize, sample_index: u64, seed: u64) -> Result<PathState> {
    backward_product_with(mu, n, sample_index, seed, false)
}

pub fn backward_product_with(
    mu: &WalkMeasure,
    n: usize,
    sample_index: u64,
    seed: u64,
    retain: bool,
) -> Result<PathState> {
    let idx = increment_indices(mu, domain::BACKWARD, n, sample_index, seed);
    run(mu.inverse_steps(), idx, retain, mu.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement;
    use crate::linalg::SquareMatrix;
    use crate::presets;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn empty_path_is_identity() {
        let mu = WalkMeasure::from_finite(&presets::sanov_uniform()).unwrap();
        for p in [forward_product(&mu, 0, 0, 1).unwrap(), backward_product(&mu, 0, 0, 1).unwrap()] {
            assert!((p.product.to_matrix() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
            assert!(p.product.log_norm().abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_growth() {
        let mu = WalkMeasure::dirac(SquareMatrix::diagonal(&[E, 1.0 / E])).unwrap();
        let p = forward_product(&mu, 100, 0, 0).unwrap();
        assert_relative_eq!(p.product.log_norm(), 100.0, max_relative = 1e-6);
        let b = backward_product(&mu, 100, 0, 0).unwrap();
        // x_{-n} = g^{-n}: growth along e_2
        let u = b.product.unit();
        assert!(u[(1, 1)].abs() > 1.0 - 1e-12 && u[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn constant_backward_increments_invert() {
        let g = presets::sanov_gamma();
        let mu = WalkMeasure::dirac(g.to_matrix()).unwrap();
        let b = backward_product(&mu, 7, 3, 9).unwrap();
        let exact = g.pow(-7).unwrap().to_matrix();
        let got = b.product.to_matrix();
        assert!((got - exact.as_matrix()).amax() / exact.op_norm() < 1e-12);
    }

    #[test]
    fn matches_naive_and_exact_products() {
        let fm = presets::sanov_skewed();
        let mu = WalkMeasure::from_finite(&fm).unwrap();
        let p = forward_product_with(&mu, 30, 5, 77, true).unwrap();
        let mats = p.increment_matrices(mu.atoms()).unwrap();
        let naive = mats.iter().fold(DMatrix::<f64>::identity(2, 2), |acc, m| acc * *m);
        let got = p.product.to_matrix();
        assert!((&got - &naive).amax() / naive.amax() < 1e-9);

        // exact rational product of the first 20 steps
        let q = forward_product_with(&mu, 20, 5, 77, true).unwrap();
        let exact = q.increments.as_ref().unwrap().iter().fold(GroupElement::identity(2), |acc, &j| {
            acc.mul(&fm.atoms()[j].0).unwrap()
        });
        let log_exact = exact.to_matrix().op_norm().ln();
        assert!((q.product.log_norm() - log_exact).abs() < 1e-10);
    }

    #[test]
    fn shift_relation() {
        let mu = WalkMeasure::from_finite(&presets::sanov_uniform()).unwrap();
        let long = forward_product_with(&mu, 11, 2, 5, true).unwrap();
        let idx = long.increments.clone().unwrap();
        let shifted = idx[1..].iter().fold(DMatrix::<f64>::identity(2, 2), |acc, &j| acc * &mu.atoms()[j]);
        let via = &mu.inverses()[idx[0]] * long.product.to_matrix();
        assert!((shifted - via).amax() < 1e-9);
    }

    #[test]
    fn deterministic_under_parallelism() {
        use rayon::prelude::*;
        let mu = WalkMeasure::from_finite(&presets::elementary_d3()).unwrap();
        let serial: Vec<_> = (0..32).map(|s| forward_product(&mu, 50, s, 8).unwrap().product).collect();
        let parallel: Vec<_> =
            (0..32u64).into_par_iter().map(|s| forward_product(&mu, 50, 31 - s, 8).unwrap().product).collect();
        let parallel: Vec<_> = parallel.into_iter().rev().collect();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn symmetric_backward_matches_forward_in_law() {
        let mu = WalkMeasure::from_finite(&presets::sanov_uniform()).unwrap();
        let stats = |f: &dyn Fn(u64) -> f64| {
            let v: Vec<f64> = (0..10_000).map(f).collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            (m, var)
        };
        let (mf, vf) = stats(&|s| forward_product(&mu, 40, s, 1).unwrap().product.log_norm());
        let (mb, vb) = stats(&|s| backward_product(&mu, 40, s, 1).unwrap().product.log_norm());
        let se = ((vf + vb) / 10_000.0).sqrt();
        assert!((mf - mb).abs() < 3.0 * se, "{mf} vs {mb} (se {se})");
    }
}
