//! Numerical laboratory for mean curvature flow and Gaussian entropy.
//!
//! The crate discretizes closed curves and surfaces, evolves them by mean
//! curvature flow, and evaluates the Gaussian-weighted area functional, its
//! supremum (the entropy), Huisken's monotone quantity, Gaussian densities,
//! parabolic rescalings and self-shrinker residuals. All numerical code is
//! generic over [`Real`]; the aliases below fix the scalar to `f64` or `f32`.

pub mod error;
pub mod flow;
pub mod gaussian;
pub mod geometry;
pub mod linalg;
pub mod rescale;
pub mod scalar;
pub mod vector;

pub use error::{Error, Result};
pub use scalar::Real;
pub use vector::{Mat3, Vec3};

pub type Surface = geometry::DiscreteHypersurface<f64>;
pub type Surface32 = geometry::DiscreteHypersurface<f32>;
pub type Point = Vec3<f64>;
pub type Center = gaussian::GaussianCenter<f64>;
pub type Curvature = geometry::CurvatureField<f64>;
pub type Entropy = gaussian::EntropyResult<f64>;
pub type State = flow::FlowState<f64>;
pub type Run = flow::Trajectory<f64>;
pub type Density = rescale::DensityEstimate<f64>;
pub type Shrinker = rescale::ShrinkerReport<f64>;
