use super::{GeodesicConfig, GeodesicPath, GeodesicState};
use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::params::{CorrelationCoefficient, Tolerances};

/// Integration aborts once `σ` drops below this. Under it the absolute
/// error floor of the controller would dominate the relative tolerance.
pub const SIGMA_FLOOR: f64 = 1e-280;

/// Absolute error floor of the step controller. Geodesics decay
/// exponentially toward `σ = 0`, so error control must stay relative far
/// below `ode_tol` in magnitude; this floor only keeps the controller away
/// from subnormal numbers.
pub const ODE_ABSOLUTE_TOLERANCE: f64 = 1e-290;

/// First-order form of the geodesic equations of the equal-variance model,
/// state `(μx, μy, σ, μ̇x, μ̇y, σ̇)`.
pub fn geodesic_rhs(r: CorrelationCoefficient, y: &[f64; 6]) -> [f64; 6] {
    let rv = r.value();
    let d = rv * rv - 1.0;
    let [_, _, sigma, vx, vy, vs] = *y;
    // Ratios first: σ and its rates can sit near 1e-170, where products
    // like σ̇² would underflow.
    let ls = vs / sigma;
    let lx = vx / sigma;
    let ly = vy / sigma;
    [
        vx,
        vy,
        vs,
        2.0 * vx * ls,
        2.0 * vy * ls,
        vs * ls + (0.25 / d) * (vx * lx + vy * ly) - rv / (4.0 * d) * vx * ly,
    ]
}

/// Numerical solution of the geodesic equations from `initial`, sampled on
/// `cfg.taus()`. `cfg.a1`/`cfg.a2` are not used: the conserved quantities
/// are measured against the initial state.
pub fn integrate_geodesic(
    cfg: &GeodesicConfig,
    initial: GeodesicState,
    tol: &Tolerances,
) -> Result<GeodesicPath> {
    tol.validate()?;
    if !(initial.sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma(0)",
            value: initial.sigma,
            reason: "must be strictly positive",
        });
    }
    let y0 = initial.to_array();
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "initial",
            value: f64::NAN,
            reason: "initial state must be finite",
        });
    }
    let taus = cfg.taus();
    let opts = OdeOptions {
        rtol: tol.ode_tol,
        atol: ODE_ABSOLUTE_TOLERANCE,
        max_steps: 10_000_000,
    };
    let r = cfg.r;
    let (ys, _) = integrate(
        |y| geodesic_rhs(r, y),
        y0,
        &taus,
        &opts,
        |tau, y| {
            if y[2] < SIGMA_FLOOR {
                Err(Error::SigmaCollapse { tau })
            } else {
                Ok(())
            }
        },
    )?;
    let states = ys.into_iter().map(GeodesicState::from_array).collect();
    Ok(GeodesicPath::new(taus, states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::{closed_form_geodesic, closed_form_state};

    fn cfg(r: f64, s0: f64, a1: f64, a2: f64, tau_max: f64, steps: usize) -> GeodesicConfig {
        GeodesicConfig::new(CorrelationCoefficient::new(r).unwrap(), s0, a1, a2, tau_max, steps)
            .unwrap()
    }

    #[test]
    fn matches_closed_form_canonical() {
        let c = cfg(0.5, 1.0, 1.0, -1.0, 10.0, 1001);
        let init = closed_form_state(&c, 0.0).unwrap();
        let num = integrate_geodesic(&c, init, &Tolerances::default()).unwrap();
        let exact = closed_form_geodesic(&c).unwrap();
        let err = num.max_abs_error(&exact);
        assert!(err.iter().all(|&e| e < 1e-6), "{err:?}");
        assert!(num.conserved_drift < 1e-8, "{}", num.conserved_drift);
    }

    #[test]
    fn equilibrium_stays_put() {
        let c = cfg(0.3, 1.0, 0.0, 0.0, 5.0, 11);
        let init = GeodesicState {
            mu_x: 0.4,
            mu_y: -1.0,
            sigma: 2.0,
            ..Default::default()
        };
        let path = integrate_geodesic(&c, init, &Tolerances::default()).unwrap();
        assert!(path.states.iter().all(|s| *s == init));
    }

    #[test]
    fn steep_config_keeps_relative_accuracy() {
        // kτ ≈ 400 at the end: σ spans ~170 orders of magnitude.
        let c = cfg(0.95, 5.0, 3.0, -3.0, 10.0, 1001);
        let init = closed_form_state(&c, 0.0).unwrap();
        let tol = Tolerances {
            ode_tol: 1e-12,
            ..Tolerances::default()
        };
        let num = integrate_geodesic(&c, init, &tol).unwrap();
        let exact = closed_form_geodesic(&c).unwrap();
        assert!(num.max_abs_error(&exact).iter().all(|&e| e < 1e-6));
        assert!(num.conserved_drift < 1e-8, "{}", num.conserved_drift);
        for (a, b) in num.states.iter().zip(&exact.states) {
            assert!(((a.sigma - b.sigma) / b.sigma).abs() < 1e-6);
        }
    }

    #[test]
    fn sigma_collapse_detected() {
        let c = cfg(0.9, 5.0, 3.0, -3.0, 40.0, 5);
        let init = closed_form_state(&c, 0.0).unwrap();
        assert!(matches!(
            integrate_geodesic(&c, init, &Tolerances::default()),
            Err(Error::SigmaCollapse { .. })
        ));
    }

    #[test]
    fn rejects_nonpositive_sigma() {
        let c = cfg(0.3, 1.0, 1.0, -1.0, 1.0, 3);
        let init = GeodesicState::default();
        assert!(integrate_geodesic(&c, init, &Tolerances::default()).is_err());
    }
}
