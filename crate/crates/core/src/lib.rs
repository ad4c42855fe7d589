//! Information geometry of correlated Gaussian models.
//!
//! The crate computes Fisher-Rao metrics of bivariate normals (closed form
//! and by quadrature), the curvature of the resulting statistical manifolds,
//! geodesics of the equal-variance model, and the information geometric
//! complexity (IGC) of those geodesics together with its dependence on the
//! correlation coefficient.
//!
//! Coordinate orders are fixed: `(mu_x, sigma_x, mu_y, sigma_y)` for the full
//! model and `(mu_x, mu_y, sigma)` for the equal-variance model.

pub mod complexity;
pub mod error;
pub mod geodesics;
pub mod geometry;
pub mod linalg;
pub mod models;
pub mod ode;
pub mod params;
pub mod quadrature;
pub mod validation;

pub use error::{Error, Result};
pub use linalg::{determinant, invert_spd, SymMatrix};
pub use params::{CorrelationCoefficient, ModelParams3, ModelParams4, Tolerances};
pub use complexity::{IgcConfig, IgcCurve};
pub use geodesics::{GeodesicConfig, GeodesicPath, GeodesicState};
pub use geometry::{ChristoffelField, CurvatureReport, DerivativeMode, MetricField};
pub use models::{BivariateGaussian, DiagonalGaussianProduct};
