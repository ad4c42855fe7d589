//! Statistical volume explored by geodesics of the equal-variance model, its
//! time average (the information geometric complexity), the entropy
//! `log ṽol`, and the compression ratio between correlated and uncorrelated
//! microvariables.
//!
//! All quantities use the canonical constants `A₁ = −A₂ = a`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesics::{a_rate, ARate};
use crate::params::{check_positive, CorrelationCoefficient, ModelParams3};

/// `√(4(4 − r²)/(2 − 2r²)²)`, the σ-independent part of the Fisher density.
pub fn fisher_density_prefactor(r: f64) -> f64 {
    (4.0 * (4.0 - r * r) / (2.0 - 2.0 * r * r).powi(2)).sqrt()
}

/// Fisher density `√det g` of the equal-variance model.
pub fn fisher_density_reduced(params: &ModelParams3) -> f64 {
    fisher_density_prefactor(params.r.value()) / params.sigma.powi(3)
}

/// Parameters of an IGC evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IgcConfig {
    r: f64,
    pub sigma0: f64,
    pub a: f64,
    pub tau_grid: Vec<f64>,
}

impl IgcConfig {
    /// Correlated case, `0 < r < 1`.
    pub fn new(r: f64, sigma0: f64, a: f64, tau_grid: Vec<f64>) -> Result<Self> {
        CorrelationCoefficient::new_positive(r)?;
        Self::build(r, sigma0, a, tau_grid)
    }

    /// Uncorrelated baseline (`r = 0` substituted into the closed forms).
    pub fn uncorrelated(sigma0: f64, a: f64, tau_grid: Vec<f64>) -> Result<Self> {
        Self::build(0.0, sigma0, a, tau_grid)
    }

    fn build(r: f64, sigma0: f64, a: f64, tau_grid: Vec<f64>) -> Result<Self> {
        check_positive("sigma0", sigma0)?;
        check_positive("a", a)?;
        if let Some(&t) = tau_grid.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "tau_grid",
                value: t,
                reason: "grid points must be finite and positive",
            });
        }
        if tau_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                name: "tau_grid",
                value: f64::NAN,
                reason: "grid must be strictly increasing",
            });
        }
        Ok(Self {
            r,
            sigma0,
            a,
            tau_grid,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Same `(σ₀, a, grid)` with `r = 0`.
    pub fn baseline(&self) -> Self {
        Self {
            r: 0.0,
            ..self.clone()
        }
    }

    pub fn rate(&self) -> ARate {
        // r is in [0, 1) by construction
        a_rate(self.a, -self.a, CorrelationCoefficient::new(self.r).unwrap())
    }

    /// Exponential decay rate `σ₀√𝒜` of the volume.
    pub fn decay_rate(&self) -> f64 {
        self.sigma0 * self.rate().sqrt()
    }

    /// `(a²/2σ₀) g′^{1/2}/𝒜^{3/2}`: the coefficient of `1/τ` at large τ.
    pub fn asymptotic_constant(&self) -> f64 {
        let rate = self.rate().value();
        self.a * self.a / (2.0 * self.sigma0) * fisher_density_prefactor(self.r)
            / rate.powf(1.5)
    }
}

/// Volume of the region explored by the geodesic at time `tau`.
pub fn volume_at(cfg: &IgcConfig, tau: f64) -> f64 {
    let rate = cfg.rate().value();
    cfg.a * cfg.a / (2.0 * rate) * fisher_density_prefactor(cfg.r) * (-cfg.decay_rate() * tau).exp()
}

/// Time average of [`volume_at`] over `[0, tau]`.
pub fn avg_volume(cfg: &IgcConfig, tau: f64) -> f64 {
    let x = cfg.decay_rate() * tau;
    if x < 1e-6 {
        // (1 − e^{−x})/x = 1 − x/2 + x²/6 − …
        volume_at(cfg, 0.0) * (1.0 - x / 2.0 + x * x / 6.0)
    } else {
        cfg.asymptotic_constant() * (-(-x).exp_m1()) / tau
    }
}

/// Composite trapezoid mean of [`volume_at`] over `[0, tau]` on
/// `intervals` uniform panels.
pub fn trapezoid_avg_volume(cfg: &IgcConfig, tau: f64, intervals: usize) -> f64 {
    let h = tau / intervals as f64;
    let inner: f64 = (1..intervals).map(|i| volume_at(cfg, i as f64 * h)).sum();
    h * (0.5 * volume_at(cfg, 0.0) + inner + 0.5 * volume_at(cfg, tau)) / tau
}

/// Information geometric entropy `log ṽol(τ)`.
pub fn ige(cfg: &IgcConfig, tau: f64) -> f64 {
    avg_volume(cfg, tau).ln()
}

/// `ṽol(τ; r) / ṽol(τ; 0)` in the long-time limit.
pub fn compression_ratio(r: CorrelationCoefficient) -> f64 {
    let r = r.value();
    let omr2 = (1.0 - r) * (1.0 + r);
    2f64.powf(-2.5)
        * (4.0 * (4.0 - r * r) / (2.0 - 2.0 * r * r).powi(2)).sqrt()
        * ((2.0 + r) / (4.0 * omr2)).powf(-1.5)
}

/// Sampled IGC curve with its fitted long-time exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IgcCurve {
    pub taus: Vec<f64>,
    pub vol: Vec<f64>,
    pub avg_vol: Vec<f64>,
    pub ige: Vec<f64>,
    pub fitted_exponent: f64,
    /// Whether the fit window starts at `σ₀√𝒜 τ ≥ 20`.
    pub asymptotic_window: bool,
}

/// Minimum number of grid nodes inside a power-law fit window.
pub const MIN_FIT_NODES: usize = 10;

/// Decay-rate multiple at which the `1/τ` regime is considered reached.
pub const ASYMPTOTIC_ONSET: f64 = 20.0;

/// Least-squares slope of `log avg_vol` against `log τ` over
/// `window = (tau_lo, tau_hi)`, inclusive.
pub fn fit_power_law(curve: &IgcCurve, window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .taus
        .iter()
        .zip(&curve.avg_vol)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    if pts.len() < MIN_FIT_NODES {
        return Err(Error::InsufficientWindow {
            nodes: pts.len(),
            required: MIN_FIT_NODES,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Fit window covering the last decade of the grid.
pub fn last_decade(taus: &[f64]) -> (f64, f64) {
    let hi = taus.last().copied().unwrap_or(0.0);
    (hi / 10.0, hi)
}

pub fn igc_curve(cfg: &IgcConfig) -> Result<IgcCurve> {
    let taus = cfg.tau_grid.clone();
    let vol: Vec<f64> = taus.iter().map(|&t| volume_at(cfg, t)).collect();
    let avg_vol: Vec<f64> = taus.iter().map(|&t| avg_volume(cfg, t)).collect();
    let ige = avg_vol.iter().map(|v| v.ln()).collect();
    let mut curve = IgcCurve {
        taus,
        vol,
        avg_vol,
        ige,
        fitted_exponent: f64::NAN,
        asymptotic_window: false,
    };
    let window = last_decade(&curve.taus);
    curve.fitted_exponent = fit_power_law(&curve, window)?;
    curve.asymptotic_window = cfg.decay_rate() * window.0 >= ASYMPTOTIC_ONSET;
    Ok(curve)
}

/// `n` points from `lo` to `hi`, log-spaced or linear.
pub fn tau_grid(lo: f64, hi: f64, n: usize, log: bool) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            if i == n - 1 {
                hi
            } else if log {
                (lo.ln() + f * (hi.ln() - lo.ln())).exp()
            } else {
                lo + f * (hi - lo)
            }
        })
        .collect()
}
