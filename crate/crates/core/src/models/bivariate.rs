use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::params::{ModelParams4, Tolerances};
use crate::quadrature::GaussHermite;

/// Identifies the generator behind [`sample_bivariate`]; written into run
/// manifests so Monte-Carlo outputs can be reproduced.
pub const PRNG_ALGORITHM: &str =
    "ChaCha20Rng::seed_from_u64 (rand_chacha 0.9) + StandardNormal ziggurat (rand_distr 0.5)";

/// Bivariate normal with correlation `r` between the two coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateGaussian {
    pub params: ModelParams4,
}

impl BivariateGaussian {
    pub fn new(params: ModelParams4) -> Self {
        Self { params }
    }

    /// Natural log of the density at `(x, y)`.
    pub fn log_density(&self, x: f64, y: f64) -> f64 {
        let p = &self.params;
        let r = p.r.value();
        let omr2 = p.r.one_minus_sq();
        let u = (x - p.mu_x) / p.sigma_x;
        let v = (y - p.mu_y) / p.sigma_y;
        let q = (u * u - 2.0 * r * u * v + v * v) / omr2;
        -0.5 * q - (2.0 * PI * p.sigma_x * p.sigma_y).ln() - 0.5 * omr2.ln()
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        self.log_density(x, y).exp()
    }

    /// Gradient of the log density with respect to
    /// `(mu_x, sigma_x, mu_y, sigma_y)`.
    pub fn score(&self, x: f64, y: f64) -> [f64; 4] {
        let p = &self.params;
        let u = (x - p.mu_x) / p.sigma_x;
        let v = (y - p.mu_y) / p.sigma_y;
        self.score_whitened(u, v)
    }

    fn score_whitened(&self, u: f64, v: f64) -> [f64; 4] {
        let p = &self.params;
        let r = p.r.value();
        let omr2 = p.r.one_minus_sq();
        let du = (u - r * v) / omr2;
        let dv = (v - r * u) / omr2;
        [
            du / p.sigma_x,
            (u * du - 1.0) / p.sigma_x,
            dv / p.sigma_y,
            (v * dv - 1.0) / p.sigma_y,
        ]
    }

    /// Maps independent standard normals onto the standardized coordinates
    /// `(u, v)` of this model (Cholesky factor of the correlation matrix).
    #[inline]
    fn correlate(&self, z1: f64, z2: f64) -> (f64, f64) {
        let r = self.params.r.value();
        (z1, r * z1 + self.params.r.one_minus_sq().sqrt() * z2)
    }

    /// `∫∫ p(x, y) dx dy` by Gauss-Hermite quadrature in whitened
    /// coordinates. The density is evaluated through [`log_density`] and the
    /// Hermite weight divided back out, so this checks the normalizer and the
    /// quadratic form rather than assuming them.
    ///
    /// [`log_density`]: Self::log_density
    pub fn density_integral(&self, order: usize) -> f64 {
        let p = &self.params;
        let gh = GaussHermite::new(order);
        let s2 = std::f64::consts::SQRT_2;
        // x = mu + L z, z = √2 t, dx dy = |L| 2 dt₁ dt₂
        let jac = 2.0 * p.sigma_x * p.sigma_y * p.r.one_minus_sq().sqrt();
        let mut total = 0.0;
        for (t1, w1) in gh.nodes.iter().zip(&gh.weights) {
            for (t2, w2) in gh.nodes.iter().zip(&gh.weights) {
                let (u, v) = self.correlate(s2 * t1, s2 * t2);
                let x = p.mu_x + p.sigma_x * u;
                let y = p.mu_y + p.sigma_y * v;
                let log_term = self.log_density(x, y) + t1 * t1 + t2 * t2 + (w1 * w2).ln();
                total += log_term.exp() * jac;
            }
        }
        total
    }

    fn fisher_at_order(&self, gh: &GaussHermite) -> [[f64; 4]; 4] {
        let mut acc = [[0.0; 4]; 4];
        let s2 = std::f64::consts::SQRT_2;
        for (t1, w1) in gh.nodes.iter().zip(&gh.weights) {
            for (t2, w2) in gh.nodes.iter().zip(&gh.weights) {
                let (u, v) = self.correlate(s2 * t1, s2 * t2);
                let s = self.score_whitened(u, v);
                let w = w1 * w2 / PI;
                for (i, row) in acc.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate().take(i + 1) {
                        *cell += w * s[i] * s[j];
                    }
                }
            }
        }
        acc
    }
}

/// Closed-form Fisher-Rao metric of the bivariate model in coordinate order
/// `(mu_x, sigma_x, mu_y, sigma_y)`.
pub fn fisher_metric_analytic_4d(params: &ModelParams4) -> SymMatrix {
    let r = params.r.value();
    let omr2 = params.r.one_minus_sq();
    let (sx, sy) = (params.sigma_x, params.sigma_y);
    let mut g = SymMatrix::zeros(4);
    g.set(0, 0, 1.0 / (sx * sx * omr2));
    g.set(1, 1, (2.0 - r * r) / (sx * sx * omr2));
    g.set(2, 2, 1.0 / (sy * sy * omr2));
    g.set(3, 3, (2.0 - r * r) / (sy * sy * omr2));
    g.set(0, 2, -r / (sx * sy * omr2));
    g.set(1, 3, -r * r / (sx * sy * omr2));
    g
}

/// Fisher metric `E[∂ log p ∂ log p]` estimated by tensor-product
/// Gauss-Hermite quadrature in the model's whitened coordinates.
///
/// Runs at `tol.quad_order` and at twice that order; fails if the two
/// estimates differ by more than `10 * tol.matrix_eps` relative to the
/// largest entry.
pub fn fisher_metric_quadrature(model: &BivariateGaussian, tol: &Tolerances) -> Result<SymMatrix> {
    tol.validate()?;
    let coarse = model.fisher_at_order(&GaussHermite::new(tol.quad_order));
    let fine = model.fisher_at_order(&GaussHermite::new(2 * tol.quad_order));
    let scale = fine
        .iter()
        .flatten()
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let change = coarse
        .iter()
        .flatten()
        .zip(fine.iter().flatten())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if change > 10.0 * tol.matrix_eps * scale {
        return Err(Error::QuadratureUnconverged { change });
    }
    Ok(SymMatrix::from_fn(4, |i, j| fine[i][j]))
}

/// Deterministic draws from the model for a fixed seed.
pub fn sample_bivariate(model: &BivariateGaussian, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let p = &model.params;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let (u, v) = model.correlate(z1, z2);
            (p.mu_x + p.sigma_x * u, p.mu_y + p.sigma_y * v)
        })
        .collect()
}
