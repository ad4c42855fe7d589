use super::{ARate, GeodesicConfig, GeodesicPath, GeodesicState};
use crate::error::{Error, Result};

/// `(sech x, tanh x, 2/(1 + e^{2x}))` without overflow for large `|x|`.
fn hyperbolic(x: f64) -> (f64, f64, f64) {
    let e = (-2.0 * x.abs()).exp();
    let sech = 2.0 * (-x.abs()).exp() / (1.0 + e);
    let tanh_abs = (1.0 - e) / (1.0 + e);
    let tanh = tanh_abs.copysign(x);
    let one_minus_tanh = if x >= 0.0 {
        2.0 * e / (1.0 + e)
    } else {
        2.0 / (1.0 + e)
    };
    (sech, tanh, one_minus_tanh)
}

struct Closed {
    k: f64,
    sigma0: f64,
    a1: f64,
    a2: f64,
    sqrt_rate: f64,
}

impl Closed {
    fn new(cfg: &GeodesicConfig, rate: ARate) -> Self {
        let sqrt_rate = rate.sqrt();
        Self {
            k: cfg.sigma0 * sqrt_rate,
            sigma0: cfg.sigma0,
            a1: cfg.a1,
            a2: cfg.a2,
            sqrt_rate,
        }
    }

    /// State and second derivatives `(μ̈x, μ̈y, σ̈)` at `tau`.
    fn eval(&self, tau: f64) -> (GeodesicState, [f64; 3]) {
        let (sech, tanh, omt) = hyperbolic(self.k * tau);
        let s0 = self.sigma0;
        let sigma = s0 * sech;
        let amp = s0 / self.sqrt_rate;
        let s2 = sigma * sigma;
        let state = GeodesicState {
            mu_x: -self.a1 * amp * omt,
            mu_y: -self.a2 * amp * omt,
            sigma,
            dmu_x: self.a1 * s2,
            dmu_y: self.a2 * s2,
            dsigma: -self.k * sigma * tanh,
        };
        let second = [
            -2.0 * self.k * self.a1 * s2 * tanh,
            -2.0 * self.k * self.a2 * s2 * tanh,
            self.k * self.k * sigma * (tanh * tanh - sech * sech),
        ];
        (state, second)
    }
}

fn constant_state(cfg: &GeodesicConfig) -> GeodesicState {
    GeodesicState {
        sigma: cfg.sigma0,
        ..GeodesicState::default()
    }
}

/// State of the closed-form geodesic at `tau`, with `σ(0) = σ₀` and
/// `μ → 0` as `τ → ∞`.
pub fn closed_form_state(cfg: &GeodesicConfig, tau: f64) -> Result<GeodesicState> {
    let rate = cfg.rate();
    if rate.value() > 0.0 {
        Ok(Closed::new(cfg, rate).eval(tau).0)
    } else if cfg.a1 == 0.0 && cfg.a2 == 0.0 {
        Ok(constant_state(cfg))
    } else {
        Err(Error::DegenerateRate)
    }
}

pub fn closed_form_geodesic(cfg: &GeodesicConfig) -> Result<GeodesicPath> {
    let taus = cfg.taus();
    let states = taus
        .iter()
        .map(|&t| closed_form_state(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeodesicPath::new(taus, states))
}

/// Left-hand sides of the three geodesic equations evaluated on the closed
/// form with exact derivatives.
pub fn ode_residual(cfg: &GeodesicConfig, tau: f64) -> Result<[f64; 3]> {
    let rate = cfg.rate();
    if rate.value() == 0.0 {
        return if cfg.a1 == 0.0 && cfg.a2 == 0.0 {
            Ok([0.0; 3])
        } else {
            Err(Error::DegenerateRate)
        };
    }
    let (s, acc) = Closed::new(cfg, rate).eval(tau);
    let r = cfg.r.value();
    let d = r * r - 1.0;
    let inv = 1.0 / s.sigma;
    Ok([
        acc[0] - 2.0 * inv * s.dmu_x * s.dsigma,
        acc[1] - 2.0 * inv * s.dmu_y * s.dsigma,
        acc[2] - inv * s.dsigma * s.dsigma - 0.25 / d * inv * s.dmu_x * s.dmu_x
            - 0.25 / d * inv * s.dmu_y * s.dmu_y
            + r / (4.0 * d) * inv * s.dmu_x * s.dmu_y,
    ])
}
