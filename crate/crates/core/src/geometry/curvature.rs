use serde::Serialize;

use super::field::{Metric, MetricField, MetricJet};
use crate::error::Result;
use crate::linalg::SymMatrix;
use crate::params::Tolerances;

/// Connection coefficients `Γᵏᵢⱼ` at one point, symmetric in `(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChristoffelField {
    dim: usize,
    gamma: Vec<f64>,
}

impl ChristoffelField {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            gamma: vec![0.0; dim * dim * dim],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γᵏᵢⱼ` (upper index first).
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.dim + i) * self.dim + j]
    }

    /// Sets `Γᵏᵢⱼ` and `Γᵏⱼᵢ`.
    pub fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        let n = self.dim;
        self.gamma[(k * n + i) * n + j] = value;
        self.gamma[(k * n + j) * n + i] = value;
    }

    /// Nonzero components `(k, i, j, value)` with `i <= j`.
    pub fn nonzeros(&self, threshold: f64) -> Vec<(usize, usize, usize, f64)> {
        let n = self.dim;
        let mut out = Vec::new();
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = self.get(k, i, j);
                    if v.abs() > threshold {
                        out.push((k, i, j, v));
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.gamma
            .iter()
            .zip(&other.gamma)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|Γᵏᵢⱼ − Γᵏⱼᵢ|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }

    /// Components as a nested `[k][i][j]` array.
    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| (0..n).map(|j| self.get(k, i, j)).collect())
                    .collect()
            })
            .collect()
    }
}

/// `Γ_mij`-style bracket `∂ᵢg_mj + ∂ⱼg_im − ∂_m g_ij`.
#[inline]
fn bracket(dg: &[SymMatrix], m: usize, i: usize, j: usize) -> f64 {
    dg[i].get(m, j) + dg[j].get(i, m) - dg[m].get(i, j)
}

fn christoffel_from_jet(jet: &MetricJet) -> ChristoffelField {
    let n = jet.g.dim();
    let mut gamma = ChristoffelField::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n)
                    .map(|m| jet.g_inv.get(k, m) * bracket(&jet.dg, m, i, j))
                    .sum();
                gamma.set(k, i, j, 0.5 * v);
            }
        }
    }
    gamma
}

/// `∂_l Γᵏᵢⱼ`, indexed `[l]`.
fn christoffel_derivatives(jet: &MetricJet) -> Vec<ChristoffelField> {
    let n = jet.g.dim();
    let ddg = jet
        .ddg
        .as_ref()
        .expect("second derivatives requested for Ricci");
    (0..n)
        .map(|l| {
            // ∂_l g^{km} = −g^{ka} ∂_l g_ab g^{bm}
            let dginv = SymMatrix::from_fn(n, |k, m| {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc -= jet.g_inv.get(k, a) * jet.dg[l].get(a, b) * jet.g_inv.get(b, m);
                    }
                }
                acc
            });
            let mut d = ChristoffelField::zeros(n);
            for k in 0..n {
                for i in 0..n {
                    for j in i..n {
                        let mut acc = 0.0;
                        for m in 0..n {
                            let dbr = ddg[l][i].get(m, j) + ddg[l][j].get(i, m) - ddg[l][m].get(i, j);
                            acc += dginv.get(k, m) * bracket(&jet.dg, m, i, j)
                                + jet.g_inv.get(k, m) * dbr;
                        }
                        d.set(k, i, j, 0.5 * acc);
                    }
                }
            }
            d
        })
        .collect()
}

/// `R_ij = ∂_kΓᵏᵢⱼ − ∂ⱼΓᵏᵢₖ + ΓᵏᵢⱼΓⁿₖₙ − ΓᵐᵢₖΓᵏⱼₘ`, symmetrized.
fn ricci_from_jet(jet: &MetricJet) -> (ChristoffelField, SymMatrix) {
    let n = jet.g.dim();
    let gamma = christoffel_from_jet(jet);
    let dgamma = christoffel_derivatives(jet);
    let trace: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|m| gamma.get(m, k, m)).sum())
        .collect();
    let full = |i: usize, j: usize| {
        let mut acc = 0.0;
        for k in 0..n {
            acc += dgamma[k].get(k, i, j) - dgamma[j].get(k, i, k);
            acc += gamma.get(k, i, j) * trace[k];
            for m in 0..n {
                acc -= gamma.get(m, i, k) * gamma.get(k, j, m);
            }
        }
        acc
    };
    let ricci = SymMatrix::from_fn(n, |i, j| 0.5 * (full(i, j) + full(j, i)));
    (gamma, ricci)
}

fn contract(ricci: &SymMatrix, g_inv: &SymMatrix) -> f64 {
    let n = ricci.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += ricci.get(i, j) * g_inv.get(i, j);
        }
    }
    acc
}

pub fn christoffel<M: Metric>(
    field: &MetricField<M>,
    point: &[f64],
    tol: &Tolerances,
) -> Result<ChristoffelField> {
    Ok(christoffel_from_jet(&field.jet(point, tol, false)?))
}

pub fn ricci_tensor<M: Metric>(
    field: &MetricField<M>,
    point: &[f64],
    tol: &Tolerances,
) -> Result<SymMatrix> {
    Ok(ricci_from_jet(&field.jet(point, tol, true)?).1)
}

/// Full contraction `R_ij g^ij`.
pub fn scalar_curvature<M: Metric>(
    field: &MetricField<M>,
    point: &[f64],
    tol: &Tolerances,
) -> Result<f64> {
    let jet = field.jet(point, tol, true)?;
    let (_, ricci) = ricci_from_jet(&jet);
    Ok(contract(&ricci, &jet.g_inv))
}

/// Christoffel symbols, Ricci tensor and scalar curvature at a point.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    pub christoffel: ChristoffelField,
    pub ricci: SymMatrix,
    pub scalar: f64,
}

pub fn curvature<M: Metric>(
    field: &MetricField<M>,
    point: &[f64],
    tol: &Tolerances,
) -> Result<CurvatureReport> {
    let jet = field.jet(point, tol, true)?;
    let (christoffel, ricci) = ricci_from_jet(&jet);
    let scalar = contract(&ricci, &jet.g_inv);
    Ok(CurvatureReport {
        point: point.to_vec(),
        christoffel,
        ricci,
        scalar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DerivativeMode, MonomialMetric};
    use crate::params::CorrelationCoefficient;

    fn reduced(mode: DerivativeMode, r: f64) -> MetricField<MonomialMetric> {
        MetricField::new(
            MonomialMetric::reduced(CorrelationCoefficient::new(r).unwrap()),
            mode,
        )
    }

    const MODES: [DerivativeMode; 2] = [DerivativeMode::Analytic, DerivativeMode::FiniteDifference];

    #[test]
    fn gamma_311_uncorrelated() {
        for mode in MODES {
            let g = christoffel(&reduced(mode, 0.0), &[1.2, -3.0, 1.0], &Tolerances::default())
                .unwrap();
            assert!((g.get(2, 0, 0) - 0.25).abs() < 1e-9, "{mode:?}");
        }
    }

    #[test]
    fn gamma_113_is_minus_inverse_sigma() {
        for mode in MODES {
            for r in [-0.6, 0.0, 0.8] {
                let g = christoffel(&reduced(mode, r), &[0.0, 0.0, 2.0], &Tolerances::default())
                    .unwrap();
                assert!((g.get(0, 0, 2) + 0.5).abs() < 1e-9);
                assert_eq!(g.get(0, 0, 2), g.get(0, 2, 0));
            }
        }
    }

    #[test]
    fn ricci_examples() {
        let tol = Tolerances::default();
        for mode in MODES {
            let ric = ricci_tensor(&reduced(mode, 0.0), &[0.0, 0.0, 1.0], &tol).unwrap();
            assert!((ric.get(0, 0) + 0.5).abs() < 1e-7, "{mode:?}: {ric:?}");
            for r in [0.0, 0.5, -0.9] {
                let ric = ricci_tensor(&reduced(mode, r), &[0.0, 0.0, 2.0], &tol).unwrap();
                assert!((ric.get(2, 2) + 0.5).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn flat_metric_is_flat() {
        let g = SymMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let tol = Tolerances::default();
        let analytic = MetricField::new(MonomialMetric::constant(&g), DerivativeMode::Analytic);
        let rep = curvature(&analytic, &[0.5, -2.0], &tol).unwrap();
        assert_eq!(rep.christoffel.max_abs(), 0.0);
        assert_eq!(rep.ricci.max_abs(), 0.0);
        assert_eq!(rep.scalar, 0.0);

        let fd = MetricField::new(MonomialMetric::constant(&g), DerivativeMode::FiniteDifference);
        let rep = curvature(&fd, &[0.5, -2.0], &tol).unwrap();
        assert!(rep.christoffel.max_abs() < 1e-8);
        assert!(rep.ricci.max_abs() < 1e-8);
        assert!(rep.scalar.abs() < 1e-8);
    }

    #[test]
    fn hyperbolic_half_plane_of_one_normal() {
        // Coordinates (mu, sigma), metric diag(1, 2)/sigma².
        let tol = Tolerances::default();
        for mode in MODES {
            let field = MetricField::new(MonomialMetric::diagonal(1), mode);
            let s = scalar_curvature(&field, &[0.3, 0.8], &tol).unwrap();
            assert!((s + 1.0).abs() < 1e-6, "{mode:?}: {s}");
        }
    }

    #[test]
    fn reduced_scalar_curvature() {
        let tol = Tolerances::default();
        let s = scalar_curvature(&reduced(DerivativeMode::Analytic, 0.5), &[1.0, 2.0, 0.3], &tol)
            .unwrap();
        assert!((s + 1.5).abs() < 1e-12);
        let s = scalar_curvature(
            &reduced(DerivativeMode::FiniteDifference, 0.5),
            &[1.0, 2.0, 0.3],
            &tol,
        )
        .unwrap();
        assert!((s + 1.5).abs() < 1e-6);
    }
}
