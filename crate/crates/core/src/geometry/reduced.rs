//! Closed-form connection and curvature of the equal-variance model.

use super::curvature::ChristoffelField;
use crate::linalg::SymMatrix;
use crate::params::ModelParams3;

/// Scalar curvature of the equal-variance model; the same at every point
/// and for every correlation.
pub const REDUCED_SCALAR_CURVATURE: f64 = -1.5;

/// The nonvanishing Christoffel symbols in index order `(mu_x, mu_y, sigma)`.
pub fn christoffel_reduced_analytic(params: &ModelParams3) -> ChristoffelField {
    let r = params.r.value();
    let d = r * r - 1.0;
    let s = params.sigma;
    let mut g = ChristoffelField::zeros(3);
    g.set(2, 0, 0, -0.25 / d / s);
    g.set(2, 0, 1, r / (8.0 * d) / s);
    g.set(2, 1, 1, -0.25 / d / s);
    g.set(0, 0, 2, -1.0 / s);
    g.set(1, 1, 2, -1.0 / s);
    g.set(2, 2, 2, -1.0 / s);
    g
}

/// Ricci tensor of the equal-variance model.
pub fn ricci_reduced_closed_form(params: &ModelParams3) -> SymMatrix {
    let r = params.r.value();
    let d = r * r - 1.0;
    let s2 = params.sigma * params.sigma;
    let mut m = SymMatrix::zeros(3);
    m.set(0, 0, 1.0 / (2.0 * d) / s2);
    m.set(1, 1, 1.0 / (2.0 * d) / s2);
    m.set(0, 1, -r / (4.0 * d) / s2);
    m.set(2, 2, -2.0 / s2);
    m
}
