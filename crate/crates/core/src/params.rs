//! Parameter points on the statistical manifolds and numeric tolerances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Correlation coefficient of the two microvariables, restricted to the
/// open interval (-1, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct CorrelationCoefficient(f64);

impl CorrelationCoefficient {
    pub const ZERO: Self = Self(0.0);

    pub fn new(r: f64) -> Result<Self> {
        if r.is_finite() && r > -1.0 && r < 1.0 {
            Ok(Self(r))
        } else {
            Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "correlation must lie in the open interval (-1, 1)",
            })
        }
    }

    /// Like [`new`](Self::new) but also requires `r > 0`, the regime in which
    /// the complexity ratio is defined.
    pub fn new_positive(r: f64) -> Result<Self> {
        let c = Self::new(r)?;
        if r > 0.0 {
            Ok(c)
        } else {
            Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "correlation must lie in the open interval (0, 1)",
            })
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - r²`, always strictly positive.
    #[inline]
    pub fn one_minus_sq(self) -> f64 {
        (1.0 - self.0) * (1.0 + self.0)
    }
}

impl TryFrom<f64> for CorrelationCoefficient {
    type Error = Error;
    fn try_from(r: f64) -> Result<Self> {
        Self::new(r)
    }
}

impl From<CorrelationCoefficient> for f64 {
    fn from(r: CorrelationCoefficient) -> f64 {
        r.0
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

/// Point `(mu_x, mu_y, sigma)` of the equal-variance model, with fixed `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams3 {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma: f64,
    pub r: CorrelationCoefficient,
}

impl ModelParams3 {
    pub fn new(mu_x: f64, mu_y: f64, sigma: f64, r: CorrelationCoefficient) -> Result<Self> {
        Ok(Self {
            mu_x: check_finite("mu_x", mu_x)?,
            mu_y: check_finite("mu_y", mu_y)?,
            sigma: check_positive("sigma", sigma)?,
            r,
        })
    }

    /// Coordinates in the canonical order `(mu_x, mu_y, sigma)`.
    pub fn coords(&self) -> [f64; 3] {
        [self.mu_x, self.mu_y, self.sigma]
    }
}

/// Point `(mu_x, sigma_x, mu_y, sigma_y)` of the full bivariate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams4 {
    pub mu_x: f64,
    pub sigma_x: f64,
    pub mu_y: f64,
    pub sigma_y: f64,
    pub r: CorrelationCoefficient,
}

impl ModelParams4 {
    pub fn new(
        mu_x: f64,
        sigma_x: f64,
        mu_y: f64,
        sigma_y: f64,
        r: CorrelationCoefficient,
    ) -> Result<Self> {
        Ok(Self {
            mu_x: check_finite("mu_x", mu_x)?,
            sigma_x: check_positive("sigma_x", sigma_x)?,
            mu_y: check_finite("mu_y", mu_y)?,
            sigma_y: check_positive("sigma_y", sigma_y)?,
            r,
        })
    }

    /// Standard bivariate normal with correlation `r`.
    pub fn standard(r: CorrelationCoefficient) -> Self {
        Self {
            mu_x: 0.0,
            sigma_x: 1.0,
            mu_y: 0.0,
            sigma_y: 1.0,
            r,
        }
    }

    /// Coordinates in the canonical order `(mu_x, sigma_x, mu_y, sigma_y)`.
    pub fn coords(&self) -> [f64; 4] {
        [self.mu_x, self.sigma_x, self.mu_y, self.sigma_y]
    }
}

/// Numeric knobs shared by the finite-difference, ODE and quadrature code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative step of first-order central differences.
    pub fd_step_scale: f64,
    /// Local error target of the adaptive integrator.
    pub ode_tol: f64,
    /// Gauss-Hermite nodes per axis.
    pub quad_order: usize,
    /// Allowed componentwise deviation of `m * m^-1` from the identity.
    pub matrix_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fd_step_scale: f64::EPSILON.cbrt(),
            ode_tol: 1e-10,
            quad_order: 64,
            matrix_eps: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        check_positive("fd_step_scale", self.fd_step_scale)?;
        check_positive("ode_tol", self.ode_tol)?;
        check_positive("matrix_eps", self.matrix_eps)?;
        if self.quad_order < 2 {
            return Err(Error::InvalidParameter {
                name: "quad_order",
                value: self.quad_order as f64,
                reason: "need at least 2 nodes per axis",
            });
        }
        Ok(())
    }

    /// Relative step used for second differences of the metric.
    pub fn second_fd_step_scale(&self) -> f64 {
        self.fd_step_scale.powf(0.75)
    }
}
