use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use super::rational::Rational;
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;

/// A word in the generators: `(generator index, exponent)` pairs read left
/// to right.
pub type Word = Vec<(usize, i64)>;

/// An element of SL(d,Q): exact entries, determinant exactly one.
///
/// Equality, ordering and hashing look only at the reduced entries in
/// row-major order; the optional word is a label, and the optional power
/// factorization is a numerical hint.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupElement {
    d: usize,
    entries: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    word: Option<Word>,
    /// `(base, k)` when this element was built as `base^k` with `|k| >= 2`.
    #[serde(skip)]
    power: Option<Box<(GroupElement, i64)>>,
}

impl GroupElement {
    pub fn identity(d: usize) -> Self {
        let mut entries = vec![Rational::zero(); d * d];
        for i in 0..d {
            entries[i * d + i] = Rational::one();
        }
        Self { d, entries, word: None, power: None }
    }

    /// Validates shape and `det == 1` exactly.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let d = rows.len();
        if d < 2 {
            return Err(Error::Invalid(format!("group elements need d >= 2, got {d}")));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Invalid("matrix rows must all have length d".into()));
        }
        let g = Self { d, entries: rows.into_iter().flatten().collect(), word: None, power: None };
        let det = g.det()?;
        if det != Rational::one() {
            return Err(Error::Invalid(format!("determinant is {det}, expected exactly 1")));
        }
        Ok(g)
    }

    pub fn from_integers(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| Rational::from(x)).collect()).collect())
    }

    pub fn with_word(mut self, word: Word) -> Self {
        self.word = Some(word);
        self
    }

    pub fn word(&self) -> Option<&Word> {
        self.word.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, j: usize) -> Rational {
        self.entries[i * self.d + j]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.d)
    }

    /// Exact determinant by fraction-valued Gaussian elimination.
    pub fn det(&self) -> Result<Rational> {
        let d = self.d;
        let mut a = self.entries.clone();
        let mut det = Rational::one();
        for col in 0..d {
            let Some(piv) = (col..d).find(|&r| !a[r * d + col].is_zero()) else {
                return Ok(Rational::zero());
            };
            if piv != col {
                for j in 0..d {
                    a.swap(piv * d + j, col * d + j);
                }
                det = det.neg();
            }
            let p = a[col * d + col];
            det = det.mul(&p)?;
            for r in col + 1..d {
                let f = a[r * d + col].div(&p)?;
                if f.is_zero() {
                    continue;
                }
                for j in col..d {
                    let v = a[r * d + j].sub(&f.mul(&a[col * d + j])?)?;
                    a[r * d + j] = v;
                }
            }
        }
        Ok(det)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = self.mul_unlabeled(other)?;
        out.word = match (&self.word, &other.word) {
            (Some(a), Some(b)) => Some(concat_words(a, b)),
            _ => None,
        };
        Ok(out)
    }

    /// Product without word bookkeeping, for bulk convolution.
    pub(crate) fn mul_unlabeled(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(self.d, other.d));
        }
        let d = self.d;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = Rational::zero();
                for k in 0..d {
                    let (x, y) = (&self.entries[i * d + k], &other.entries[k * d + j]);
                    if x.is_zero() || y.is_zero() {
                        continue;
                    }
                    acc = acc.add(&x.mul(y)?)?;
                }
                entries.push(acc);
            }
        }
        Ok(Self { d, entries, word: None, power: None })
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.d;
        if d == 2 {
            // det = 1: [[a,b],[c,e]]^-1 = [[e,-b],[-c,a]]
            let e = &self.entries;
            let entries = vec![e[3], e[1].neg(), e[2].neg(), e[0]];
            return Ok(Self { d, entries, word: self.word.as_ref().map(invert_word), power: self.inverse_power() });
        }
        let mut a = self.entries.clone();
        let mut inv = Self::identity(d).entries;
        for col in 0..d {
            let piv = (col..d)
                .find(|&r| !a[r * d + col].is_zero())
                .ok_or_else(|| Error::Numeric("singular exact matrix".into()))?;
            if piv != col {
                for j in 0..d {
                    a.swap(piv * d + j, col * d + j);
                    inv.swap(piv * d + j, col * d + j);
                }
            }
            let p = a[col * d + col];
            for j in 0..d {
                a[col * d + j] = a[col * d + j].div(&p)?;
                inv[col * d + j] = inv[col * d + j].div(&p)?;
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let f = a[r * d + col];
                if f.is_zero() {
                    continue;
                }
                for j in 0..d {
                    a[r * d + j] = a[r * d + j].sub(&f.mul(&a[col * d + j])?)?;
                    inv[r * d + j] = inv[r * d + j].sub(&f.mul(&inv[col * d + j])?)?;
                }
            }
        }
        Ok(Self { d, entries: inv, word: self.word.as_ref().map(invert_word), power: self.inverse_power() })
    }

    /// `self^k` for any integer `k` by repeated squaring.
    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::identity(self.d);
        let mut sq = Self { word: None, power: None, ..base.clone() };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        acc.word = self.word.as_ref().map(|w| power_word(w, k));
        if k.unsigned_abs() >= 2 {
            acc.power = Some(Box::new(match self.power_factorization() {
                Some((b, j)) => (b.clone(), j * k),
                None => (Self { power: None, ..self.clone() }, k),
            }));
        }
        Ok(acc)
    }

    /// `(base, k)` with `self = base^k` when the element was built by
    /// [`GroupElement::pow`] with `|k| >= 2`. Lets floating code apply a large
    /// power as `|k|` well-conditioned steps.
    pub fn power_factorization(&self) -> Option<(&GroupElement, i64)> {
        self.power.as_ref().map(|p| (&p.0, p.1))
    }

    fn inverse_power(&self) -> Option<Box<(GroupElement, i64)>> {
        self.power.as_ref().map(|p| Box::new((p.0.clone(), -p.1)))
    }

    pub fn to_matrix(&self) -> SquareMatrix {
        let d = self.d;
        SquareMatrix::new(nalgebra::DMatrix::from_fn(d, d, |i, j| self.entries[i * d + j].to_f64()))
            .expect("finite rational entries")
    }
}

fn concat_words(a: &Word, b: &Word) -> Word {
    let mut out = a.clone();
    for &(g, e) in b {
        match out.last_mut() {
            Some((lg, le)) if *lg == g => {
                *le += e;
                if *le == 0 {
                    out.pop();
                }
            }
            _ => out.push((g, e)),
        }
    }
    out
}

fn invert_word(w: &Word) -> Word {
    w.iter().rev().map(|&(g, e)| (g, -e)).collect()
}

fn power_word(w: &Word, k: i64) -> Word {
    let unit = if k < 0 { invert_word(w) } else { w.clone() };
    (0..k.unsigned_abs()).fold(Vec::new(), |acc, _| concat_words(&acc, &unit))
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.entries == other.entries
    }
}

impl Eq for GroupElement {}

impl Hash for GroupElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.d.hash(state);
        self.entries.hash(state);
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d.cmp(&other.d).then_with(|| self.entries.cmp(&other.entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> GroupElement {
        GroupElement::from_integers(&[&[1, 2], &[0, 1]]).unwrap()
    }

    #[test]
    fn powers_remember_their_base() {
        let g = GroupElement::from_integers(&[&[2, 1], &[1, 1]]).unwrap();
        let p = g.pow(6).unwrap();
        let (b, k) = p.power_factorization().unwrap();
        assert_eq!((b, k), (&g, 6));
        let (b, k) = p.inverse().unwrap().power_factorization().map(|(b, k)| (b.clone(), k)).unwrap();
        assert_eq!((b, k), (g.clone(), -6));
        let (b, k) = p.pow(-2).unwrap().power_factorization().map(|(b, k)| (b.clone(), k)).unwrap();
        assert_eq!((b, k), (g.clone(), -12));
        assert!(g.pow(1).unwrap().power_factorization().is_none());
        assert!(p.mul(&g).unwrap().power_factorization().is_none());
        // the hint does not take part in equality
        assert_eq!(p, p.mul(&GroupElement::identity(2)).unwrap());
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(GroupElement::from_integers(&[&[2, 0], &[0, 1]]).is_err());
        assert!(GroupElement::from_integers(&[&[1, 0, 0], &[0, 1, 0]]).is_err());
    }

    #[test]
    fn inverse_and_powers() {
        let g = a();
        assert!(g.mul(&g.inverse().unwrap()).unwrap().is_identity());
        assert_eq!(g.pow(3).unwrap(), GroupElement::from_integers(&[&[1, 6], &[0, 1]]).unwrap());
        assert_eq!(g.pow(-2).unwrap(), GroupElement::from_integers(&[&[1, -4], &[0, 1]]).unwrap());
        assert!(g.pow(0).unwrap().is_identity());
        let h = GroupElement::from_integers(&[&[2, 1, 0], &[1, 1, 0], &[0, 3, 1]]).unwrap();
        assert!(h.mul(&h.inverse().unwrap()).unwrap().is_identity());
        assert_eq!(h.pow(-3).unwrap().mul(&h.pow(3).unwrap()).unwrap(), GroupElement::identity(3));
    }

    #[test]
    fn words_compose() {
        let g = a().with_word(vec![(0, 1)]);
        let h = GroupElement::from_integers(&[&[1, 0], &[2, 1]]).unwrap().with_word(vec![(1, 1)]);
        let gh = g.mul(&h).unwrap();
        assert_eq!(gh.word().unwrap(), &vec![(0, 1), (1, 1)]);
        assert_eq!(gh.pow(-2).unwrap().word().unwrap(), &vec![(1, -1), (0, -1), (1, -1), (0, -1)]);
        assert!(g.mul(&g.inverse().unwrap()).unwrap().word().unwrap().is_empty());
    }

    #[test]
    fn rational_entries() {
        let half = Rational::new(1, 2).unwrap();
        let g = GroupElement::from_rows(vec![
            vec![Rational::integer(2), Rational::zero()],
            vec![Rational::integer(3), half],
        ])
        .unwrap();
        assert_eq!(g.det().unwrap(), Rational::one());
        assert!(g.mul(&g.inverse().unwrap()).unwrap().is_identity());
    }
}
