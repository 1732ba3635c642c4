//! Fixed-point counting numerics for degree-`d` endomorphisms of the
//! two-sphere: winding numbers, Lefschetz indices, topological and annular
//! degrees, the decomposition of `f⁻¹(A)` into annuli, strip lifts of
//! annulus maps, and a census of fixed points of iterates.

mod algebra;
pub mod annuli;
pub mod census;
pub mod charts;
pub mod degree;
pub mod format;
pub mod gallery;
pub mod lefschetz;
mod product;
mod roots;
pub mod strip_lift;
pub mod winding;

pub use charts::{evaluate, parse_map, Chart, MapKind, MapSpec, Pole, RadialProfile, SpherePoint};
pub use num_complex::Complex64;
pub use roots::RootError;
