pub mod error;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub mod scalar;

pub use error::{Error, Result};
pub mod meanvalue;
pub mod grid;
pub mod cutoff;
pub mod forms;
pub mod bochner;
pub mod witness;
pub mod extension;
pub mod dbar1d;
pub mod report;
pub mod acceptance;

/// `f64` instances of the scalar-generic geometry.
pub type ComplexPoint = geometry::Point<f64>;
pub type HolomorphicCylinder = geometry::Cylinder<f64>;
pub type Region = geometry::DomainBox<f64>;
pub type UnitaryFrame = geometry::Frame<f64>;
pub type Cutoff = cutoff::CutoffProfile<f64>;
