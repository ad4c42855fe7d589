//! Riemannian machinery on metric fields: Christoffel symbols, Ricci tensor,
//! scalar curvature, and pullbacks under reparametrization.
//!
//! Index conventions follow the coordinate order of each field; for the
//! equal-variance model that is `(mu_x, mu_y, sigma)`.

mod curvature;
mod field;
mod pullback;
mod reduced;

pub use curvature::{
    christoffel, curvature, ricci_tensor, scalar_curvature, ChristoffelField, CurvatureReport,
};
pub use field::{DerivativeMode, Metric, MetricField, MetricJet, MonomialMetric};
pub use pullback::{pullback_metric, IdentityMap, LogCoordinate, PullbackMetric, Reparametrization};
pub use reduced::{
    christoffel_reduced_analytic, ricci_reduced_closed_form, REDUCED_SCALAR_CURVATURE,
};
