//! Reproducible sampling of sample paths of the random walk.
//!
//! Every random draw is addressed by `(experiment seed, domain, sample
//! index, step)` through a keyed ChaCha stream, so results do not depend on
//! thread count or evaluation order.

mod measure;
mod path;
mod rng;

pub use measure::{apply_steps, product_steps, sample_increment, StepTable, WalkMeasure};
pub use path::{
    backward_product, backward_product_with, forward_product, forward_product_with, increment_indices, PathState,
};
pub use rng::{domain, Stream, StreamKey};
