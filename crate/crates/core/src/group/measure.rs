use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::HashMap;

use super::element::GroupElement;
use super::rational::Rational;
use super::regular::analyze_regularity;
use crate::error::{Error, Result};

/// Default bound on the support of convolution powers.
pub const DEFAULT_SUPPORT_CAP: usize = 5_000_000;

/// A finitely supported probability measure on SL(d,Q) with exact weights.
///
/// Atoms are kept sorted by the canonical order of [`GroupElement`] and are
/// pairwise distinct, so two equal measures have identical atom lists.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteMeasure {
    d: usize,
    atoms: Vec<(GroupElement, Rational)>,
    /// Non-degeneracy is asserted by whoever builds the measure, not checked.
    pub nondegenerate: bool,
}

/// Equality compares atoms and weights; the non-degeneracy flag is metadata.
impl PartialEq for FiniteMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.atoms == other.atoms
    }
}

impl FiniteMeasure {
    /// Merges repeated atoms and checks that the weights sum to exactly 1.
    pub fn new(atoms: Vec<(GroupElement, Rational)>) -> Result<Self> {
        let d = atoms.first().map(|a| a.0.dim()).ok_or(Error::EmptyMeasure)?;
        let mut map: HashMap<GroupElement, Rational> = HashMap::with_capacity(atoms.len());
        for (g, w) in atoms {
            if g.dim() != d {
                return Err(Error::DimensionMismatch(g.dim(), d));
            }
            if !w.is_positive() {
                return Err(Error::Invalid(format!("atom weight {w} is not positive")));
            }
            let e = map.entry(g).or_insert_with(Rational::zero);
            *e = e.add(&w)?;
        }
        let m = Self::from_map(d, map);
        let total = m.total_weight()?;
        if total != Rational::one() {
            return Err(Error::Invalid(format!("weights sum to {total}, expected 1")));
        }
        Ok(m)
    }

    /// Uniform measure on the given elements.
    pub fn uniform(elements: Vec<GroupElement>) -> Result<Self> {
        let n = elements.len() as i128;
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        let w = Rational::new(1, n)?;
        Self::new(elements.into_iter().map(|g| (g, w)).collect())
    }

    pub fn dirac(g: GroupElement) -> Self {
        Self { d: g.dim(), atoms: vec![(g, Rational::one())], nondegenerate: false }
    }

    fn from_map(d: usize, map: HashMap<GroupElement, Rational>) -> Self {
        let mut atoms: Vec<_> = map.into_iter().collect();
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        Self { d, atoms, nondegenerate: false }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn atoms(&self) -> &[(GroupElement, Rational)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight_of(&self, g: &GroupElement) -> Rational {
        self.atoms
            .binary_search_by(|a| a.0.cmp(g))
            .map(|i| self.atoms[i].1)
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn total_weight(&self) -> Result<Rational> {
        self.atoms.iter().try_fold(Rational::zero(), |acc, (_, w)| acc.add(w))
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.1.to_f64()).collect()
    }

    pub fn is_symmetric(&self) -> Result<bool> {
        Ok(self.reflect()? == *self)
    }

    /// Short stable fingerprint of the atoms and weights.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.d.to_le_bytes());
        for (g, w) in &self.atoms {
            for e in g.entries() {
                h.update(e.to_string().as_bytes());
                h.update(b",");
            }
            h.update(b"@");
            h.update(w.to_string().as_bytes());
            h.update(b";");
        }
        hex::encode(&h.finalize()[..8])
    }

    /// `mu * nu`: the law of `g h` with `g ~ mu`, `h ~ nu` independent.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.convolve_capped(other, DEFAULT_SUPPORT_CAP)
    }

    pub fn convolve_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(self.d, other.d));
        }
        // exact weights make the merge order irrelevant, so chunks can be
        // combined in any order and still give the same measure
        let chunk = (self.atoms.len() / (4 * rayon::current_num_threads()).max(1)).max(1);
        let partials: Vec<HashMap<GroupElement, Rational>> = self
            .atoms
            .par_chunks(chunk)
            .map(|part| -> Result<HashMap<GroupElement, Rational>> {
                let mut local = HashMap::with_capacity(part.len() * other.atoms.len());
                for (g, wg) in part {
                    for (h, wh) in &other.atoms {
                        let w = wg.mul(wh)?;
                        let e = local.entry(g.mul_unlabeled(h)?).or_insert_with(Rational::zero);
                        *e = e.add(&w)?;
                    }
                }
                Ok(local)
            })
            .collect::<Result<_>>()?;
        let mut merged: HashMap<GroupElement, Rational> = HashMap::new();
        for part in partials {
            if merged.is_empty() {
                merged = part;
                continue;
            }
            for (g, w) in part {
                let e = merged.entry(g).or_insert_with(Rational::zero);
                *e = e.add(&w)?;
            }
            if merged.len() > cap {
                return Err(Error::SupportCap { cap, achieved_n: 0 });
            }
        }
        if merged.len() > cap {
            return Err(Error::SupportCap { cap, achieved_n: 0 });
        }
        Ok(Self::from_map(self.d, merged))
    }

    /// The reflected measure `g -> mu(g^{-1})`.
    pub fn reflect(&self) -> Result<Self> {
        let mut atoms: Vec<_> = self
            .atoms
            .iter()
            .map(|(g, w)| Ok((g.inverse()?, *w)))
            .collect::<Result<_>>()?;
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self { d: self.d, atoms, nondegenerate: self.nondegenerate })
    }

    /// Shannon entropy in nats.
    pub fn shannon_entropy(&self) -> f64 {
        shannon_entropy_of(self.atoms.iter().map(|a| a.1.to_f64()))
    }

    /// `sum mu(g) log ||g||` with the operator norm.
    pub fn first_moment(&self) -> f64 {
        self.atoms.iter().map(|(g, w)| w.to_f64() * g.to_matrix().op_norm().ln()).sum()
    }

    /// `mu^k = mu/2 + (delta_{gamma^k} + delta_{gamma^{-k}})/4`.
    ///
    /// `gamma` must be diagonalizable over R with an eigenvalue off the unit
    /// circle (R-regular elements qualify).
    pub fn build_mu_k(&self, gamma: &GroupElement, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("k must be positive".into()));
        }
        if gamma.dim() != self.d {
            return Err(Error::DimensionMismatch(gamma.dim(), self.d));
        }
        let reg = analyze_regularity(&gamma.to_matrix())?;
        if !reg.weakly_regular {
            return Err(Error::Precondition(
                "gamma is not diagonalizable over R with an eigenvalue off the unit circle".into(),
            ));
        }
        let half = Rational::new(1, 2)?;
        let quarter = Rational::new(1, 4)?;
        let gk = gamma.pow(k as i64)?;
        let gmk = gamma.pow(-(k as i64))?;
        let mut atoms: Vec<(GroupElement, Rational)> =
            self.atoms.iter().map(|(g, w)| Ok((g.clone(), w.mul(&half)?))).collect::<Result<_>>()?;
        atoms.push((gk, quarter));
        atoms.push((gmk, quarter));
        let mut m = Self::new(atoms)?;
        m.nondegenerate = self.nondegenerate;
        Ok(m)
    }
}

pub(crate) fn shannon_entropy_of(weights: impl Iterator<Item = f64>) -> f64 {
    weights.filter(|&w| w > 0.0).map(|w| -w * w.ln()).sum::<f64>().max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_abs_diff_eq;

    fn q(n: i128, d: i128) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let mu = presets::sanov_uniform();
        let e = FiniteMeasure::dirac(GroupElement::identity(2));
        assert_eq!(e.convolve(&mu).unwrap(), mu);
        assert_eq!(mu.convolve(&e).unwrap(), mu);
    }

    #[test]
    fn dirac_products() {
        let [a, _, b, _] = presets::sanov_generators();
        let c = FiniteMeasure::dirac(a.clone()).convolve(&FiniteMeasure::dirac(b.clone())).unwrap();
        assert_eq!(c, FiniteMeasure::dirac(a.mul(&b).unwrap()));
    }

    #[test]
    fn sanov_square_has_quarter_at_identity() {
        let mu = presets::sanov_uniform();
        let mu2 = mu.convolve(&mu).unwrap();
        assert_eq!(mu2.weight_of(&GroupElement::identity(2)), q(1, 4));
        // free group: 12 reduced words of length 2 plus the identity
        assert_eq!(mu2.len(), 13);
        assert_eq!(mu2.total_weight().unwrap(), Rational::one());
    }

    #[test]
    fn support_cap() {
        let mu = presets::sanov_uniform();
        let err = mu.convolve_capped(&mu, 5).unwrap_err();
        assert!(matches!(err, Error::SupportCap { cap: 5, .. }));
    }

    #[test]
    fn reflection() {
        let mu = presets::sanov_uniform();
        assert_eq!(mu.reflect().unwrap(), mu);
        let [a, ..] = presets::sanov_generators();
        let r = FiniteMeasure::dirac(a.clone()).reflect().unwrap();
        assert_eq!(r, FiniteMeasure::dirac(a.inverse().unwrap()));
        let skew = presets::sanov_skewed();
        assert_ne!(skew.reflect().unwrap(), skew);
        assert_eq!(skew.reflect().unwrap().reflect().unwrap(), skew);
        assert_abs_diff_eq!(skew.reflect().unwrap().shannon_entropy(), skew.shannon_entropy(), epsilon = 1e-15);
    }

    #[test]
    fn entropies() {
        let [a, ainv, b, _] = presets::sanov_generators();
        assert_eq!(FiniteMeasure::dirac(a.clone()).shannon_entropy(), 0.0);
        assert_abs_diff_eq!(presets::sanov_uniform().shannon_entropy(), 4f64.ln(), epsilon = 1e-14);
        let m = FiniteMeasure::new(vec![(a, q(1, 2)), (ainv, q(1, 4)), (b, q(1, 4))]).unwrap();
        assert_abs_diff_eq!(m.shannon_entropy(), 1.5 * 2f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let [a, ainv, ..] = presets::sanov_generators();
        assert!(FiniteMeasure::new(vec![(a.clone(), q(1, 2)), (ainv, q(1, 3))]).is_err());
        assert!(FiniteMeasure::new(vec![(a, q(-1, 2))]).is_err());
    }

    #[test]
    fn first_moments() {
        assert_eq!(FiniteMeasure::dirac(GroupElement::identity(3)).first_moment(), 0.0);
        let top = 1.0 + 2f64.sqrt(); // top singular value of [[1,2],[0,1]]
        assert_abs_diff_eq!(presets::sanov_uniform().first_moment(), top.ln(), epsilon = 1e-12);
    }

    #[test]
    fn mu_k_weights_and_entropy() {
        let mu = presets::sanov_uniform();
        let gamma = presets::sanov_gamma();
        let m = mu.build_mu_k(&gamma, 3).unwrap();
        let mut w = m.weights_f64();
        w.sort_by(f64::total_cmp);
        assert_eq!(w, vec![0.125, 0.125, 0.125, 0.125, 0.25, 0.25]);
        assert_abs_diff_eq!(m.shannon_entropy(), 2.5 * 2f64.ln(), epsilon = 1e-14);
        assert!(m.is_symmetric().unwrap());
        assert_eq!(m.total_weight().unwrap(), Rational::one());
    }

    #[test]
    fn mu_k_merges_with_support() {
        // gamma = A is parabolic, so use a measure whose support contains a
        // hyperbolic gamma itself
        let gamma = GroupElement::from_integers(&[&[2, 1], &[1, 1]]).unwrap();
        let others = presets::sanov_generators();
        let mu = FiniteMeasure::uniform(vec![gamma.clone(), others[0].clone(), others[1].clone(), others[2].clone()])
            .unwrap();
        let m = mu.build_mu_k(&gamma, 1).unwrap();
        assert_eq!(m.weight_of(&gamma), q(3, 8));
        assert_eq!(m.len(), 5);
    }

    #[test]
    fn mu_k_rejects_parabolic_gamma() {
        let mu = presets::sanov_uniform();
        let [a, ..] = presets::sanov_generators();
        assert!(matches!(mu.build_mu_k(&a, 2), Err(Error::Precondition(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_measure() -> impl Strategy<Value = FiniteMeasure> {
            let gens = presets::sanov_generators();
            proptest::collection::vec((0usize..4, 1i128..5), 1..4).prop_map(move |picks| {
                let total: i128 = picks.iter().map(|p| p.1).sum();
                let atoms = picks
                    .iter()
                    .map(|&(g, w)| (gens[g].clone(), Rational::new(w, total).unwrap()))
                    .collect();
                FiniteMeasure::new(atoms).unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn convolution_is_associative(a in small_measure(), b in small_measure(), c in small_measure()) {
                let left = a.convolve(&b).unwrap().convolve(&c).unwrap();
                let right = a.convolve(&b.convolve(&c).unwrap()).unwrap();
                prop_assert_eq!(&left, &right);
                prop_assert_eq!(left.total_weight().unwrap(), Rational::one());
            }

            #[test]
            fn reflection_reverses_products(a in small_measure(), b in small_measure()) {
                let lhs = a.convolve(&b).unwrap().reflect().unwrap();
                let rhs = b.reflect().unwrap().convolve(&a.reflect().unwrap()).unwrap();
                prop_assert_eq!(&lhs, &rhs);
                prop_assert_eq!(&a.reflect().unwrap().reflect().unwrap(), &a);
            }

            #[test]
            fn entropy_bounds(a in small_measure(), k in 1u32..6) {
                let h = a.shannon_entropy();
                prop_assert!(h >= 0.0 && h <= (a.len() as f64).ln() + 1e-12);
                let mk = a.build_mu_k(&presets::sanov_gamma(), k).unwrap();
                let mix = 1.5 * 2f64.ln();
                prop_assert!(mk.shannon_entropy() <= 0.5 * h + mix + 1e-12);
                for (g, _) in mk.atoms() {
                    prop_assert_eq!(g.det().unwrap(), Rational::one());
                }
            }
        }
    }
}
