//! Adaptive Dormand-Prince 5(4) integrator for small autonomous systems.
//!
//! The integrator lands exactly on every requested output time instead of
//! interpolating, so each reported state carries the controlled local error.

use crate::error::{Error, Result};

// Butcher tableau. The nodes c_i are unused for autonomous systems.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th-order weights minus 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Integrates `y' = f(y)` from `y0` at `times[0]` and returns the state at
/// every entry of `times` (which must be increasing).
///
/// `guard` is checked on each accepted state; returning an error aborts.
pub fn integrate<const N: usize, F, G>(
    f: F,
    y0: [f64; N],
    times: &[f64],
    opts: &OdeOptions,
    guard: G,
) -> Result<(Vec<[f64; N]>, OdeStats)>
where
    F: Fn(&[f64; N]) -> [f64; N],
    G: Fn(f64, &[f64; N]) -> Result<()>,
{
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(times.len());
    if times.is_empty() {
        return Ok((out, stats));
    }
    let mut t = times[0];
    let mut y = y0;
    out.push(y);
    let mut k1 = f(&y);

    let err_norm = |y: &[f64; N], y_new: &[f64; N], err: &[f64; N]| {
        let mut worst = 0.0f64;
        for i in 0..N {
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            worst = worst.max(err[i].abs() / sc);
        }
        worst
    };

    // Initial step from the unweighted scale of the solution; relative
    // error control with a tiny atol would otherwise blow up on zero entries.
    let span = times[times.len() - 1] - t;
    let mut h = {
        let d0 = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let d1 = k1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0.min(span.abs().max(f64::MIN_POSITIVE))
    };

    for &target in &times[1..] {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::StepFailure { tau: t, step: h });
            }
            let remaining = target - t;
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            if step <= 1e-14 * t.abs().max(1.0) && !clipped {
                return Err(Error::StepFailure { tau: t, step });
            }

            let k2 = f(&axpy(&y, step, &[(A21, &k1)]));
            let k3 = f(&axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(&axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(&axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(&axpy(
                &y,
                step,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ));
            let y_new = axpy(
                &y,
                step,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(&y_new);
            let err = axpy(
                &[0.0; N],
                step,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let e = err_norm(&y, &y_new, &err);
            let finite = y_new.iter().all(|v| v.is_finite()) && e.is_finite();

            if finite && e <= 1.0 {
                stats.accepted += 1;
                t = if clipped { target } else { t + step };
                y = y_new;
                k1 = k7;
                guard(t, &y)?;
                let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                // A step shortened to hit an output time says nothing
                // about the controller's preferred size.
                if !clipped || step * factor > h {
                    h = step * factor;
                }
            } else {
                stats.rejected += 1;
                let factor = if finite { (0.9 * e.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h = step * factor;
                if h <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepFailure { tau: t, step: h });
                }
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}
