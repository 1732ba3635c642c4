//! Points of the Riemann sphere, its two standard charts, and the closed-form
//! map specifications the analyses run on.

mod grammar;
mod map;
mod point;
mod profile;

pub use grammar::{parse_map, ParseError};
pub use map::{evaluate, MapKind, MapSpec};
pub use point::{Chart, Pole, SpherePoint};
pub use profile::RadialProfile;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("point is the pole at infinity of the {chart:?} chart")]
    PoleHasNoCoordinate { chart: Chart },
    #[error("invalid radial profile: {0}")]
    InvalidProfile(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("P and Q share the root {root}")]
    CommonRoot { root: num_complex::Complex64 },
}
