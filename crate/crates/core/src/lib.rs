//! Planning toolkit for disaster-response drone fleets.
//!
//! * [`field`]: the altitude + road-importance raster everything runs on.
//! * [`fleet`]: drone catalog and the load-dependent range model.
//! * [`packing`]: genetic 3-D bin packing of daily package plans into cargo
//!   bays, plan enumeration and container filling.
//! * [`siting`]: oversampled weighted k-means for container bases, drone
//!   assignment and inter-base transfer checks.
//! * [`walker`]: biased random walk that proposes reconnaissance routes.
//! * [`coverage`]: road coverage scores and route-pair combination.
//! * [`sensitivity`]: lognormal parameter sampling, fitting and regression.
//! * [`io`]: CSV/JSON/PGM artifacts.
//!
//! The numeric kernels are generic over [`Real`] (`f32`/`f64`); the aliases
//! below fix the scalar to `f64`, which is what the raster pipeline uses.

// Validation uses `!(x > 0.0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coverage;
pub mod error;
pub mod field;
pub mod fleet;
pub mod io;
pub mod packing;
pub mod scalar;
pub mod seeding;
pub mod sensitivity;
pub mod siting;
pub mod walker;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DroneSpec = fleet::DroneSpec<f64>;
pub type RangeModel = fleet::RangeModel<f64>;
pub type WeightedPoint = siting::WeightedPoint<f64>;
pub type KMeansResult = siting::KMeansResult<f64>;
pub type FitResult = sensitivity::FitResult<f64>;
pub type Regression = sensitivity::Regression<f64>;
