//! Gaussian model family: densities, scores, Fisher-Rao metrics and the
//! sample statistics of correlated pairs.

mod bivariate;
mod diagonal;
mod reduced;
mod stats;

pub use bivariate::{
    fisher_metric_analytic_4d, fisher_metric_quadrature, sample_bivariate, BivariateGaussian,
    PRNG_ALGORITHM,
};
pub use diagonal::{fisher_metric_diagonal, DiagonalGaussianProduct};
pub use reduced::fisher_metric_reduced;
pub use stats::{best_linear_msq, correlation_coefficient, LinearFit};
