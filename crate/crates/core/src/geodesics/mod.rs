//! Geodesics of the equal-variance model: the closed-form family, a
//! numerical integrator for the geodesic equations, and the conservation
//! laws `dμ/dτ = A σ²` that tie them together.

mod closed_form;
mod integrate;

pub use closed_form::{closed_form_geodesic, closed_form_state, ode_residual};
pub use integrate::{geodesic_rhs, integrate_geodesic, ODE_ABSOLUTE_TOLERANCE, SIGMA_FLOOR};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{check_finite, check_positive, CorrelationCoefficient};

/// `𝒜(r) = (A₁² + A₂² − r A₁A₂) / (4(1 − r²))`, the squared decay rate of
/// geodesics per unit `σ₀`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct ARate(f64);

impl ARate {
    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn sqrt(self) -> f64 {
        self.0.sqrt()
    }
}

pub fn a_rate(a1: f64, a2: f64, r: CorrelationCoefficient) -> ARate {
    let num = a1 * a1 + a2 * a2 - r.value() * a1 * a2;
    // num >= (|a1| - |a2|)² + (1 - |r|)|a1 a2| >= 0; clamp rounding noise.
    ARate((num / (4.0 * r.one_minus_sq())).max(0.0))
}

/// Boundary data and sampling of one geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicConfig {
    pub r: CorrelationCoefficient,
    /// `σ(0)`
    pub sigma0: f64,
    /// `A₁ = μ̇_x / σ²`
    pub a1: f64,
    /// `A₂ = μ̇_y / σ²`
    pub a2: f64,
    pub tau_max: f64,
    pub output_steps: usize,
}

impl GeodesicConfig {
    pub fn new(
        r: CorrelationCoefficient,
        sigma0: f64,
        a1: f64,
        a2: f64,
        tau_max: f64,
        output_steps: usize,
    ) -> Result<Self> {
        if output_steps < 2 {
            return Err(Error::InvalidParameter {
                name: "output_steps",
                value: output_steps as f64,
                reason: "need at least 2 output nodes",
            });
        }
        Ok(Self {
            r,
            sigma0: check_positive("sigma0", sigma0)?,
            a1: check_finite("a1", a1)?,
            a2: check_finite("a2", a2)?,
            tau_max: check_positive("tau_max", tau_max)?,
            output_steps,
        })
    }

    pub fn rate(&self) -> ARate {
        a_rate(self.a1, self.a2, self.r)
    }

    /// `output_steps` uniform nodes on `[0, tau_max]`.
    pub fn taus(&self) -> Vec<f64> {
        let n = self.output_steps - 1;
        (0..=n)
            .map(|i| self.tau_max * i as f64 / n as f64)
            .collect()
    }
}

/// `(μx, μy, σ)` and their τ-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GeodesicState {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma: f64,
    pub dmu_x: f64,
    pub dmu_y: f64,
    pub dsigma: f64,
}

impl GeodesicState {
    pub fn to_array(self) -> [f64; 6] {
        [self.mu_x, self.mu_y, self.sigma, self.dmu_x, self.dmu_y, self.dsigma]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            mu_x: a[0],
            mu_y: a[1],
            sigma: a[2],
            dmu_x: a[3],
            dmu_y: a[4],
            dsigma: a[5],
        }
    }

    /// `(μ̇x/σ², μ̇y/σ²)`, or `None` where `σ²` is not a normal `f64`.
    pub fn conserved(&self) -> Option<(f64, f64)> {
        let s2 = self.sigma * self.sigma;
        if !s2.is_normal() {
            return None;
        }
        let ok = |d: f64| d == 0.0 || d.is_normal();
        if !ok(self.dmu_x) || !ok(self.dmu_y) {
            return None;
        }
        Some((self.dmu_x / s2, self.dmu_y / s2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub taus: Vec<f64>,
    pub states: Vec<GeodesicState>,
    /// Largest relative deviation of `μ̇/σ²` from its value at the first
    /// node (absolute when that value is zero).
    pub conserved_drift: f64,
}

impl GeodesicPath {
    pub(crate) fn new(taus: Vec<f64>, states: Vec<GeodesicState>) -> Self {
        let conserved_drift = conserved_drift(&states);
        Self {
            taus,
            states,
            conserved_drift,
        }
    }

    /// Largest absolute difference in `(μx, μy, σ)` against another path
    /// sampled on the same nodes, per coordinate.
    pub fn max_abs_error(&self, other: &Self) -> [f64; 3] {
        let mut worst = [0.0f64; 3];
        for (a, b) in self.states.iter().zip(&other.states) {
            worst[0] = worst[0].max((a.mu_x - b.mu_x).abs());
            worst[1] = worst[1].max((a.mu_y - b.mu_y).abs());
            worst[2] = worst[2].max((a.sigma - b.sigma).abs());
        }
        worst
    }
}

/// Nodes where `σ²` underflows are skipped: there the conserved ratio is not
/// representable in `f64`.
fn conserved_drift(states: &[GeodesicState]) -> f64 {
    let Some((q1, q2)) = states.first().and_then(|s| s.conserved()) else {
        return 0.0;
    };
    let rel = |q: f64, q0: f64| {
        if q0 == 0.0 {
            q.abs()
        } else {
            ((q - q0) / q0).abs()
        }
    };
    states
        .iter()
        .filter_map(|s| s.conserved())
        .map(|(a, b)| rel(a, q1).max(rel(b, q2)))
        .fold(0.0, f64::max)
}
