//! Empirical dimension proxies for sample clouds on Grassmannians:
//! pointwise ball-mass scaling, mean-dimension intervals, greedy covering
//! numbers (Ledrappier and box style) and the entropy/gap upper bound.
//!
//! All values are finite-sample proxies; reports carry the radius window
//! and the sample size they were computed at.

pub mod benchmarks;
mod covering;
mod pointwise;
mod report;

pub use covering::{covering_number, covering_numbers, default_slope_window, ledrappier_box_summary, CoveringTable, LedrappierBoxSummary};
pub use pointwise::{
    log_grid, mean_dimension_interval, pointwise_dims, resolution_floor, MeanDimInterval, PointwiseCurves, RadiusWindow,
    DEFAULT_MASS_TAIL, FLOOR_CONSTANT,
};
pub use report::{bound_from_parts, dimension_bound, BoundEstimate, BoxEstimate, DimensionReport, DimensionSettings, HAUSDORFF_TAIL};
