//! Dense floating linear algebra on small square matrices: the Cartan
//! decomposition, exterior powers, Grassmannians embedded through Plücker
//! coordinates, and full flags.

mod cartan;
mod exterior;
mod flag;
mod grassmann;
mod matrix;
mod scaled;

pub use cartan::{cartan_decompose, svd_sorted, CartanDecomposition, CartanVector, SortedSvd};
pub use exterior::{binomial, exterior_power, exterior_power_of, plucker, subsets};
pub use flag::{flag_project, Flag};
pub use grassmann::{grassmann_distance, orthonormalize, GrassmannPoint};
pub use matrix::SquareMatrix;
pub use scaled::ScaledMatrix;
pub(crate) use grassmann::wedge_distance;
