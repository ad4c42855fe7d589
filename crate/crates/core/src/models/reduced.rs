use crate::linalg::SymMatrix;
use crate::params::ModelParams3;

/// Metric of the equal-variance model in coordinate order
/// `(mu_x, mu_y, sigma)`. Every entry scales as `1/sigma²`.
pub fn fisher_metric_reduced(params: &ModelParams3) -> SymMatrix {
    let r = params.r.value();
    let omr2 = params.r.one_minus_sq();
    let s2 = params.sigma * params.sigma;
    let mut g = SymMatrix::zeros(3);
    g.set(0, 0, 1.0 / omr2 / s2);
    g.set(1, 1, 1.0 / omr2 / s2);
    g.set(0, 1, -r / (2.0 * omr2) / s2);
    g.set(2, 2, 4.0 / s2);
    g
}
