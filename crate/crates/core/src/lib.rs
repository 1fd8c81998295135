//! Heat kernels on Euclidean polyhedral complexes: construction of metric
//! graphs and 2-complexes, spectral and closed-form kernels, Monte Carlo
//! diffusion, random walks on deck groups, Poincaré and Whitney audits, and
//! the comparison machinery between a complex and its deck group.

pub mod analysis;
pub mod bridge;
pub mod closed_form;
pub mod complex;
pub mod error;
pub mod spectral;
pub mod stochastic;
pub mod verify;

pub use complex::{Complex, GeometryBounds, PointRef};
pub use error::{Error, Result};
pub use spectral::{DiscreteOperator, SpectralDecomposition};
pub use stochastic::{Elem, GroupModel};
