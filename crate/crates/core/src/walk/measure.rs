use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use super::rng::StreamKey;
use crate::error::{Error, Result};
use crate::group::{FiniteMeasure, GroupElement};
use crate::linalg::{exterior_power_of, SquareMatrix};
use crate::tolerances;

/// Per atom, factors in product order: atom `j` equals
/// `table[j][0] * table[j][1] * ...`.
pub type StepTable = Vec<Vec<DMatrix<f64>>>;

/// Floating-point view of a finitely supported measure, used for sampling.
///
/// Unlike [`FiniteMeasure`] it accepts irrational atoms (rotations,
/// `diag(e, 1/e)`); nothing here ever tests atoms for equality.
#[derive(Debug, Clone)]
pub struct WalkMeasure {
    d: usize,
    atoms: Vec<DMatrix<f64>>,
    inverses: Vec<DMatrix<f64>>,
    steps: StepTable,
    inverse_steps: StepTable,
    weights: Vec<f64>,
    cdf: Vec<f64>,
    fingerprint: String,
}

impl WalkMeasure {
    /// Atoms and inverses are rounded from exact arithmetic, so large powers
    /// keep their exact determinant instead of a float cancellation.
    pub fn from_finite(m: &FiniteMeasure) -> Result<Self> {
        let mut atoms = Vec::with_capacity(m.len());
        let mut inverses = Vec::with_capacity(m.len());
        let mut steps = Vec::with_capacity(m.len());
        let mut inverse_steps = Vec::with_capacity(m.len());
        let mut weights = Vec::with_capacity(m.len());
        for (g, w) in m.atoms() {
            let (a, ai) = (g.to_matrix().into_inner(), g.inverse()?.to_matrix().into_inner());
            match g.power_factorization() {
                Some((base, k)) => {
                    let (b, bi) = (base.to_matrix().into_inner(), base.inverse()?.to_matrix().into_inner());
                    let (fwd, bwd) = if k > 0 { (b, bi) } else { (bi, b) };
                    let reps = k.unsigned_abs() as usize;
                    steps.push(vec![fwd; reps]);
                    inverse_steps.push(vec![bwd; reps]);
                }
                None => {
                    steps.push(vec![a.clone()]);
                    inverse_steps.push(vec![ai.clone()]);
                }
            }
            atoms.push(a);
            inverses.push(ai);
            weights.push(w.to_f64());
        }
        let mut out = Self::from_parts(m.dim(), atoms, inverses, steps, inverse_steps, weights)?;
        out.fingerprint = m.fingerprint();
        Ok(out)
    }

    /// Atoms must be unimodular within the determinant tolerance and the
    /// weights must sum to one within the weight tolerance.
    pub fn from_matrices(atoms: Vec<(SquareMatrix, f64)>) -> Result<Self> {
        let t = tolerances::current();
        let d = atoms.first().map(|a| a.0.dim()).ok_or(Error::EmptyMeasure)?;
        let mut mats = Vec::with_capacity(atoms.len());
        let mut inverses = Vec::with_capacity(atoms.len());
        let mut weights = Vec::with_capacity(atoms.len());
        for (g, w) in atoms {
            if g.dim() != d {
                return Err(Error::DimensionMismatch(g.dim(), d));
            }
            if !g.is_unimodular(t.det) {
                return Err(Error::Invalid(format!("atom has determinant {}, expected 1", g.det())));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Invalid(format!("atom weight {w} is not positive")));
            }
            inverses.push(g.inverse()?.into_inner());
            mats.push(g.into_inner());
            weights.push(w);
        }
        let steps = mats.iter().map(|m| vec![m.clone()]).collect();
        let inverse_steps = inverses.iter().map(|m| vec![m.clone()]).collect();
        Self::from_parts(d, mats, inverses, steps, inverse_steps, weights)
    }

    fn from_parts(
        d: usize,
        atoms: Vec<DMatrix<f64>>,
        inverses: Vec<DMatrix<f64>>,
        steps: StepTable,
        inverse_steps: StepTable,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tolerances::current().weight_sum {
            return Err(Error::Invalid(format!("weights sum to {total}, expected 1")));
        }
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let mut h = Sha256::new();
        for (m, w) in atoms.iter().zip(&weights) {
            for x in m.iter() {
                h.update(x.to_le_bytes());
            }
            h.update(w.to_le_bytes());
        }
        let fingerprint = hex::encode(&h.finalize()[..8]);
        Ok(Self { d, atoms, inverses, steps, inverse_steps, weights, cdf, fingerprint })
    }

    pub fn dirac(g: SquareMatrix) -> Result<Self> {
        Self::from_matrices(vec![(g, 1.0)])
    }

    /// The reflected measure: same weights, inverted atoms.
    pub fn reflect(&self) -> Self {
        Self {
            d: self.d,
            atoms: self.inverses.clone(),
            inverses: self.atoms.clone(),
            steps: self.inverse_steps.clone(),
            inverse_steps: self.steps.clone(),
            weights: self.weights.clone(),
            cdf: self.cdf.clone(),
            fingerprint: format!("{}~", self.fingerprint),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[DMatrix<f64>] {
        &self.atoms
    }

    pub fn inverses(&self) -> &[DMatrix<f64>] {
        &self.inverses
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Inverse-CDF lookup of a uniform in `[0, 1)`.
    pub fn index_for(&self, u: f64) -> usize {
        let total = *self.cdf.last().expect("nonempty");
        self.cdf.partition_point(|&c| c <= u * total).min(self.cdf.len() - 1)
    }

    /// Atom index drawn at `key` (forward domain).
    pub fn sample(&self, key: StreamKey) -> usize {
        self.index_for(key.uniform())
    }

    /// `wedge^i g` for every atom, in atom order.
    pub fn exterior_atoms(&self, i: usize) -> Result<Vec<DMatrix<f64>>> {
        self.atoms.iter().map(|g| exterior_power_of(g, i)).collect()
    }

    /// Factorization of every atom into steps. Floating products along paths
    /// go through the steps: an atom that is a large power is applied as that
    /// many well-conditioned factors, which keeps products such as
    /// `gamma^k gamma^{-k}` resolved.
    pub fn steps(&self) -> &StepTable {
        &self.steps
    }

    pub fn inverse_steps(&self) -> &StepTable {
        &self.inverse_steps
    }

    /// The step table pushed forward to `wedge^i`.
    pub fn exterior_steps(&self, i: usize) -> Result<StepTable> {
        exterior_table(&self.steps, i)
    }

    pub fn exterior_inverse_steps(&self, i: usize) -> Result<StepTable> {
        exterior_table(&self.inverse_steps, i)
    }
}

fn exterior_table(table: &StepTable, i: usize) -> Result<StepTable> {
    table.iter().map(|steps| steps.iter().map(|s| exterior_power_of(s, i)).collect()).collect()
}

/// The factors of `h_{idx[0]} h_{idx[1]} ...` in product order.
pub fn product_steps<'a>(table: &'a StepTable, idx: &[usize]) -> Vec<&'a DMatrix<f64>> {
    idx.iter().flat_map(|&j| table[j].iter()).collect()
}

/// `normalize(g w)` and `log ||g w||` for the atom `g` given by its steps,
/// applying one step at a time.
pub fn apply_steps(steps: &[DMatrix<f64>], w: &[f64]) -> (Vec<f64>, f64) {
    let mut v = w.to_vec();
    let mut log_norm = 0.0;
    for s in steps.iter().rev() {
        let next: Vec<f64> = (0..s.nrows()).map(|r| (0..s.ncols()).map(|c| s[(r, c)] * v[c]).sum()).collect();
        let n = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        log_norm += n.ln();
        v = next.into_iter().map(|x| x / n).collect();
    }
    (v, log_norm)
}

/// Atom of `mu` drawn at `key` by inverse CDF on the keyed uniform.
pub fn sample_increment(mu: &FiniteMeasure, key: StreamKey) -> GroupElement {
    let u = key.uniform();
    let mut acc = 0.0;
    let atoms = mu.atoms();
    for (g, w) in atoms {
        acc += w.to_f64();
        if u < acc {
            return g.clone();
        }
    }
    atoms[atoms.len() - 1].0.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn powers_become_steps() {
        let mu = presets::sanov_uniform().build_mu_k(&presets::sanov_gamma(), 5).unwrap();
        let w = WalkMeasure::from_finite(&mu).unwrap();
        for j in 0..w.len() {
            let prod = w.steps()[j].iter().fold(DMatrix::<f64>::identity(2, 2), |acc, s| acc * s);
            let inv = w.inverse_steps()[j].iter().fold(DMatrix::<f64>::identity(2, 2), |acc, s| acc * s);
            let scale = w.atoms()[j].amax();
            assert!((prod - &w.atoms()[j]).amax() <= 1e-12 * scale);
            assert!((inv - &w.inverses()[j]).amax() <= 1e-12 * scale);
        }
        assert_eq!(w.steps().iter().map(Vec::len).max(), Some(5));
        let r = w.reflect();
        assert_eq!(r.steps()[4].len(), 5);
    }

    #[test]
    fn stepwise_application_matches_direct() {
        let s = vec![DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 3.0, 1.0])];
        let w = [0.6, 0.8];
        let direct = &s[0] * &s[1] * nalgebra::DVector::from_column_slice(&w);
        let (v, log_norm) = apply_steps(&s, &w);
        assert!((log_norm - direct.norm().ln()).abs() < 1e-12);
        let unit = direct.normalize();
        assert!((v[0] - unit[0]).abs() < 1e-12 && (v[1] - unit[1]).abs() < 1e-12);
    }

    #[test]
    fn dirac_always_returns_the_atom() {
        let [a, ..] = presets::sanov_generators();
        let m = FiniteMeasure::dirac(a.clone());
        for s in 0..100 {
            assert_eq!(sample_increment(&m, StreamKey::new(5, s, s * 3)), a);
        }
    }

    #[test]
    fn frequencies_match_weights() {
        let [a, b, ..] = presets::sanov_generators();
        let m = WalkMeasure::from_finite(&FiniteMeasure::uniform(vec![a, b]).unwrap()).unwrap();
        let mut stream = super::super::rng::Stream::new(11, super::super::rng::domain::FORWARD, 0);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| m.index_for(stream.uniform()) == 0).count();
        // three binomial standard deviations are 0.0015
        assert!((hits as f64 / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn same_key_same_draw() {
        let mu = presets::sanov_uniform();
        let key = StreamKey::new(9, 4, 17);
        assert_eq!(sample_increment(&mu, key), sample_increment(&mu, key));
        let w = WalkMeasure::from_finite(&mu).unwrap();
        assert_eq!(w.sample(key), w.sample(key));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(WalkMeasure::from_matrices(vec![(SquareMatrix::diagonal(&[2.0, 1.0]), 1.0)]).is_err());
        assert!(WalkMeasure::from_matrices(vec![(SquareMatrix::identity(2), 0.5)]).is_err());
        assert!(WalkMeasure::from_matrices(vec![]).is_err());
    }

    #[test]
    fn reflection_swaps_inverses() {
        let w = WalkMeasure::from_finite(&presets::sanov_skewed()).unwrap();
        let r = w.reflect();
        for (g, gi) in w.atoms().iter().zip(r.atoms()) {
            assert!((g * gi - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
        }
        assert_eq!(r.weights(), w.weights());
    }
}
