//! Gauss-Hermite quadrature.

use std::f64::consts::PI;

/// Nodes and weights for `∫ exp(-t²) f(t) dt ≈ Σ wᵢ f(tᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Rule with `n` nodes, found by Newton iteration on the orthonormal
    /// Hermite recurrence. Nodes are returned in increasing order.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        const PIM4: f64 = 0.751_125_544_464_942_5; // π^(-1/4)
        let nf = n as f64;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut z = 0.0f64;
        for i in 0..(n + 1) / 2 {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = PIM4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        x.reverse();
        w.reverse();
        Self {
            nodes: x,
            weights: w,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `E[f(z₁, z₂)]` for `(z₁, z₂)` independent standard normals, by the
    /// tensor-product rule.
    pub fn expect_standard_normal_2d<T, F>(&self, mut f: F, zero: T) -> T
    where
        F: FnMut(f64, f64) -> T,
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let s2 = std::f64::consts::SQRT_2;
        let mut acc = zero;
        for (ti, wi) in self.nodes.iter().zip(&self.weights) {
            for (tj, wj) in self.nodes.iter().zip(&self.weights) {
                acc = acc + f(s2 * ti, s2 * tj) * (wi * wj / PI);
            }
        }
        acc
    }
}
