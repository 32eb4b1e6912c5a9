//! Asymptotic entropy of the walk, differential (Furstenberg) entropy of
//! its harmonic measures, and the decay of translated ball masses.

mod asymptotic;
mod chain;
mod decay;
mod differential;

pub use asymptotic::{asymptotic_entropy, asymptotic_entropy_capped, AsymptoticEntropyEstimate};
pub use chain::EntropyChain;
pub use decay::{translated_mass_decay, BallSpec, DecayReport};
pub use differential::{default_k, differential_entropy, DifferentialEntropyEstimate, BOOTSTRAP_RESAMPLES};
