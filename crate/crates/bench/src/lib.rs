//! Shared fixtures for the benchmarks.

use flagwalk::harmonic::{sample_harmonic_measure, EmpiricalMeasure};
use flagwalk::presets;
use flagwalk::walk::WalkMeasure;

pub fn sanov_walk() -> WalkMeasure {
    WalkMeasure::from_finite(&presets::sanov_uniform()).expect("valid measure")
}

pub fn d3_walk() -> WalkMeasure {
    WalkMeasure::from_finite(&presets::elementary_d3()).expect("valid measure")
}

/// `count` harmonic samples of the Sanov walk on the projective line.
pub fn sanov_cloud(count: usize) -> EmpiricalMeasure {
    sample_harmonic_measure(&sanov_walk(), 1, 60, count, 1).expect("sampling succeeds")
}
