//! Exact arithmetic in SL(d,Q) and finitely supported probability measures.

mod element;
mod io;
mod measure;
mod rational;
mod regular;

pub use element::{GroupElement, Word};
pub use io::{load_measure, measure_to_json, parse_measure, AtomSpec, MeasureFile};
pub use measure::{FiniteMeasure, DEFAULT_SUPPORT_CAP};
pub use rational::Rational;
pub use regular::{analyze_regularity, is_r_regular, Diagonalization, Regularity};
