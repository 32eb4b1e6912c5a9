//! Numerical laboratory for random walks on SL(d,R).
//!
//! The crate estimates Lyapunov spectra of random matrix products, samples
//! harmonic (stationary) measures on flag varieties and Grassmannians,
//! estimates asymptotic and differential (Furstenberg) entropies and the
//! dimensions of the sampled measures, and runs the `mu^k` sweep in which the
//! entropy stays bounded while the top exponent grows without bound.
//!
//! Layering, bottom to top: [`linalg`] and [`group`] (exact measures), then
//! [`walk`] (reproducible sampling), [`lyapunov`], [`harmonic`],
//! [`entropy`], [`dimension`], and finally [`experiments`], which drives
//! everything from a JSON config.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod group;
pub mod harmonic;
pub mod linalg;
pub mod lyapunov;
pub mod persist;
pub mod presets;
pub mod stats;
pub mod tolerances;
pub mod walk;

pub use error::{Error, Result};
pub use group::{FiniteMeasure, GroupElement, Rational};
pub use harmonic::EmpiricalMeasure;
pub use linalg::{CartanVector, Flag, GrassmannPoint, ScaledMatrix, SquareMatrix};
pub use lyapunov::{LyapunovSpectrum, SpectrumEstimate};
pub use tolerances::Tolerances;
pub use walk::{StreamKey, WalkMeasure};
