//! Sample correlation and the best linear mean-square predictor.
//!
//! Moments use the population (1/N) convention throughout.

use crate::error::{Error, Result};

/// Compensated (Neumaier) summation.
fn sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

struct Moments {
    mean: (f64, f64),
    sd: (f64, f64),
}

fn moments(samples: &[(f64, f64)]) -> Result<Moments> {
    if samples.len() < 2 {
        return Err(Error::DegenerateSample("need at least two samples"));
    }
    let n = samples.len() as f64;
    let mx = sum(samples.iter().map(|p| p.0)) / n;
    let my = sum(samples.iter().map(|p| p.1)) / n;
    let vx = sum(samples.iter().map(|p| (p.0 - mx).powi(2))) / n;
    let vy = sum(samples.iter().map(|p| (p.1 - my).powi(2))) / n;
    if !(vx > 0.0) || !(vy > 0.0) {
        return Err(Error::DegenerateSample("zero variance in one coordinate"));
    }
    Ok(Moments {
        mean: (mx, my),
        sd: (vx.sqrt(), vy.sqrt()),
    })
}

fn normalized(samples: &[(f64, f64)], m: &Moments) -> Vec<(f64, f64)> {
    samples
        .iter()
        .map(|&(x, y)| ((x - m.mean.0) / m.sd.0, (y - m.mean.1) / m.sd.1))
        .collect()
}

/// Sample correlation coefficient `(⟨x₁x₂⟩ − μ₁μ₂) / (σ₁σ₂)`.
pub fn correlation_coefficient(samples: &[(f64, f64)]) -> Result<f64> {
    let m = moments(samples)?;
    let n = samples.len() as f64;
    let cov = sum(samples
        .iter()
        .map(|&(x, y)| (x - m.mean.0) * (y - m.mean.1)))
        / n;
    Ok((cov / (m.sd.0 * m.sd.1)).clamp(-1.0, 1.0))
}

/// Minimizer of `⟨(η₁ − c₁ − c₂η₂)²⟩` over the normalized variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub c1: f64,
    pub c2: f64,
    /// Mean-square residual at the minimum.
    pub residual: f64,
}

/// Ordinary least squares of `η₁` on `η₂`. The residual is the actual mean
/// square of the fitted errors, not the closed form `1 − r̂²`.
pub fn best_linear_msq(samples: &[(f64, f64)]) -> Result<LinearFit> {
    let m = moments(samples)?;
    let eta = normalized(samples, &m);
    let n = eta.len() as f64;
    let e1 = sum(eta.iter().map(|p| p.0)) / n;
    let e2 = sum(eta.iter().map(|p| p.1)) / n;
    let var2 = sum(eta.iter().map(|p| (p.1 - e2).powi(2))) / n;
    let cov = sum(eta.iter().map(|p| (p.0 - e1) * (p.1 - e2))) / n;
    let c2 = cov / var2;
    let c1 = e1 - c2 * e2;
    let residual = sum(eta.iter().map(|p| (p.0 - c1 - c2 * p.1).powi(2))) / n;
    Ok(LinearFit { c1, c2, residual })
}
