use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::params::{check_finite, check_positive};

/// Product of `n` independent univariate normals.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGaussianProduct {
    means: Vec<f64>,
    sigmas: Vec<f64>,
}

impl DiagonalGaussianProduct {
    pub fn new(means: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                reason: "need at least one microvariable",
            });
        }
        if means.len() != sigmas.len() {
            return Err(Error::DimensionMismatch {
                expected: means.len(),
                got: sigmas.len(),
            });
        }
        for &m in &means {
            check_finite("mean", m)?;
        }
        for &s in &sigmas {
            check_positive("sigma", s)?;
        }
        Ok(Self { means, sigmas })
    }

    pub fn n(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }
}

/// Diagonal `2n × 2n` metric in coordinate order `(mu_1, sigma_1, ..., mu_n, sigma_n)`.
pub fn fisher_metric_diagonal(model: &DiagonalGaussianProduct) -> SymMatrix {
    let diag: Vec<f64> = model
        .sigmas
        .iter()
        .flat_map(|s| {
            let inv = 1.0 / (s * s);
            [inv, 2.0 * inv]
        })
        .collect();
    SymMatrix::diagonal(&diag)
}
