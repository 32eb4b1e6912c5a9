//! JSON measure files:
//! `{ "d": 2, "atoms": [ { "matrix": [[1, "2"], [0, 1]], "weight": "1/4" } ] }`.
//!
//! Matrix entries and weights may be JSON numbers, integers in strings,
//! `"p/q"` fractions or finite decimals; all are read exactly.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::element::{GroupElement, Word};
use super::measure::FiniteMeasure;
use super::rational::Rational;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub d: usize,
    pub atoms: Vec<AtomSpec>,
    /// Configuration assertion that the support generates a Zariski-dense
    /// semigroup; recorded, never verified.
    #[serde(default)]
    pub nondegenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub matrix: Vec<Vec<Rational>>,
    pub weight: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<Word>,
}

impl MeasureFile {
    pub fn into_measure(self) -> Result<FiniteMeasure> {
        if self.atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let atoms = self
            .atoms
            .into_iter()
            .enumerate()
            .map(|(idx, a)| {
                if a.matrix.len() != self.d {
                    return Err(Error::Invalid(format!("atom {idx}: expected {} rows", self.d)));
                }
                let g = GroupElement::from_rows(a.matrix)
                    .map_err(|e| Error::Invalid(format!("atom {idx}: {e}")))?;
                let g = match a.word {
                    Some(w) => g.with_word(w),
                    None => g,
                };
                Ok((g, a.weight))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut m = FiniteMeasure::new(atoms)?;
        m.nondegenerate = self.nondegenerate;
        Ok(m)
    }

    pub fn from_measure(m: &FiniteMeasure) -> Self {
        let d = m.dim();
        Self {
            d,
            atoms: m
                .atoms()
                .iter()
                .map(|(g, w)| AtomSpec {
                    matrix: (0..d).map(|i| (0..d).map(|j| g.entry(i, j)).collect()).collect(),
                    weight: *w,
                    word: g.word().cloned(),
                })
                .collect(),
            nondegenerate: m.nondegenerate,
            name: None,
        }
    }
}

pub fn parse_measure(json: &str) -> Result<FiniteMeasure> {
    let file: MeasureFile = serde_json::from_str(json)?;
    file.into_measure()
}

pub fn load_measure(path: impl AsRef<Path>) -> Result<FiniteMeasure> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_measure(&text)
}

pub fn measure_to_json(m: &FiniteMeasure) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MeasureFile::from_measure(m))?)
}
