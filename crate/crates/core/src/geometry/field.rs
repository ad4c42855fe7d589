use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::params::{CorrelationCoefficient, Tolerances};

/// A smooth SPD metric `g_ij(x)` over some coordinate domain.
pub trait Metric: Send + Sync {
    fn dim(&self) -> usize;

    fn in_domain(&self, x: &[f64]) -> bool;

    /// Metric at `x`; `DomainViolation` outside the domain.
    fn metric(&self, x: &[f64]) -> Result<SymMatrix>;

    /// Exact `∂_k g_ij`, indexed by `k`. `None` if the field has no
    /// analytic derivatives.
    fn gradient(&self, _x: &[f64]) -> Option<Result<Vec<SymMatrix>>> {
        None
    }

    /// Exact `∂_k ∂_l g_ij`, indexed `[k][l]`.
    fn hessian(&self, _x: &[f64]) -> Option<Result<Vec<Vec<SymMatrix>>>> {
        None
    }
}

impl<M: Metric + ?Sized> Metric for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        (**self).in_domain(x)
    }
    fn metric(&self, x: &[f64]) -> Result<SymMatrix> {
        (**self).metric(x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<SymMatrix>>> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &[f64]) -> Option<Result<Vec<Vec<SymMatrix>>>> {
        (**self).hessian(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// A metric together with the way its derivatives are obtained.
#[derive(Debug, Clone)]
pub struct MetricField<M> {
    pub metric: M,
    pub mode: DerivativeMode,
}

/// Metric, inverse, and first/second derivatives at one point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: SymMatrix,
    pub g_inv: SymMatrix,
    /// `∂_k g_ij`
    pub dg: Vec<SymMatrix>,
    /// `∂_k ∂_l g_ij`, present when requested.
    pub ddg: Option<Vec<Vec<SymMatrix>>>,
}

fn combine(terms: &[(f64, &SymMatrix)]) -> SymMatrix {
    let n = terms[0].1.dim();
    SymMatrix::from_fn(n, |i, j| terms.iter().map(|(c, m)| c * m.get(i, j)).sum())
}

impl<M: Metric> MetricField<M> {
    pub fn new(metric: M, mode: DerivativeMode) -> Self {
        Self { metric, mode }
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn eval_checked(&self, x: &[f64]) -> Result<SymMatrix> {
        if !self.metric.in_domain(x) {
            return Err(Error::DomainViolation(format!("{x:?}")));
        }
        self.metric.metric(x)
    }

    /// Evaluates `f(step)` with the nominal step, retrying once with a step
    /// ten times smaller if the stencil leaves the domain.
    fn with_stencil<T>(
        &self,
        point: &[f64],
        axes: &[usize],
        nominal: &[f64],
        f: impl Fn(&[f64]) -> Result<T>,
    ) -> Result<T> {
        let mut steps = nominal.to_vec();
        for attempt in 0..2 {
            let inside = stencil_points(point, axes, &steps)
                .iter()
                .all(|p| self.metric.in_domain(p));
            if inside {
                return f(&steps);
            }
            if attempt == 0 {
                steps.iter_mut().for_each(|h| *h /= 10.0);
            }
        }
        Err(Error::DomainViolation(format!(
            "finite-difference stencil around {point:?} leaves the domain"
        )))
    }

    fn fd_gradient(&self, x: &[f64], tol: &Tolerances) -> Result<Vec<SymMatrix>> {
        (0..self.dim())
            .map(|k| {
                let h = tol.fd_step_scale * x[k].abs().max(1.0);
                self.with_stencil(x, &[k], &[h], |s| {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[k] += s[0];
                    xm[k] -= s[0];
                    // Use the realized step to cancel representation error.
                    let dh = xp[k] - xm[k];
                    let gp = self.eval_checked(&xp)?;
                    let gm = self.eval_checked(&xm)?;
                    Ok(combine(&[(1.0 / dh, &gp), (-1.0 / dh, &gm)]))
                })
            })
            .collect()
    }

    fn fd_hessian(
        &self,
        x: &[f64],
        g0: &SymMatrix,
        tol: &Tolerances,
    ) -> Result<Vec<Vec<SymMatrix>>> {
        let n = self.dim();
        let scale = tol.second_fd_step_scale();
        let mut out = vec![vec![SymMatrix::zeros(n); n]; n];
        for k in 0..n {
            for l in 0..=k {
                let hk = scale * x[k].abs().max(1.0);
                let hl = scale * x[l].abs().max(1.0);
                let d = if k == l {
                    self.with_stencil(x, &[k], &[hk], |s| {
                        let mut xp = x.to_vec();
                        let mut xm = x.to_vec();
                        xp[k] += s[0];
                        xm[k] -= s[0];
                        let h = 0.5 * (xp[k] - xm[k]);
                        let gp = self.eval_checked(&xp)?;
                        let gm = self.eval_checked(&xm)?;
                        let inv = 1.0 / (h * h);
                        Ok(combine(&[(inv, &gp), (-2.0 * inv, g0), (inv, &gm)]))
                    })?
                } else {
                    self.with_stencil(x, &[k, l], &[hk, hl], |s| {
                        let at = |sk: f64, sl: f64| {
                            let mut p = x.to_vec();
                            p[k] += sk * s[0];
                            p[l] += sl * s[1];
                            self.eval_checked(&p)
                        };
                        let (pp, pm, mp, mm) = (at(1.0, 1.0)?, at(1.0, -1.0)?, at(-1.0, 1.0)?, at(-1.0, -1.0)?);
                        let c = 1.0 / (4.0 * s[0] * s[1]);
                        Ok(combine(&[(c, &pp), (-c, &pm), (-c, &mp), (c, &mm)]))
                    })?
                };
                out[k][l] = d.clone();
                out[l][k] = d;
            }
        }
        Ok(out)
    }

    /// Metric and derivatives at `x`; second derivatives only when
    /// `second_order` is set.
    pub fn jet(&self, x: &[f64], tol: &Tolerances, second_order: bool) -> Result<MetricJet> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let g = self.eval_checked(x)?;
        let g_inv = g.invert_spd()?;
        let (dg, ddg) = match self.mode {
            DerivativeMode::Analytic => {
                let dg = self
                    .metric
                    .gradient(x)
                    .ok_or(Error::AnalyticDerivativesUnavailable)??;
                let ddg = if second_order {
                    Some(
                        self.metric
                            .hessian(x)
                            .ok_or(Error::AnalyticDerivativesUnavailable)??,
                    )
                } else {
                    None
                };
                (dg, ddg)
            }
            DerivativeMode::FiniteDifference => {
                tol.validate()?;
                let dg = self.fd_gradient(x, tol)?;
                let ddg = if second_order {
                    Some(self.fd_hessian(x, &g, tol)?)
                } else {
                    None
                };
                (dg, ddg)
            }
        };
        Ok(MetricJet { g, g_inv, dg, ddg })
    }
}

fn stencil_points(point: &[f64], axes: &[usize], steps: &[f64]) -> Vec<Vec<f64>> {
    let mut pts = vec![point.to_vec()];
    for (&axis, &h) in axes.iter().zip(steps) {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                let mut a = p.clone();
                let mut b = p;
                a[axis] += h;
                b[axis] -= h;
                [a, b]
            })
            .collect();
    }
    pts
}

/// One metric entry `c · ∏ x_k^{p_k}`.
#[derive(Debug, Clone, PartialEq)]
struct Monomial {
    i: usize,
    j: usize,
    coef: f64,
    powers: Vec<(usize, i32)>,
}

impl Monomial {
    fn eval(&self, x: &[f64], skip: &[usize]) -> f64 {
        // Value with the factors in `skip` differentiated once each.
        let mut v = self.coef;
        for &(k, p) in &self.powers {
            let times = skip.iter().filter(|&&s| s == k).count() as i32;
            let mut e = p;
            for _ in 0..times {
                v *= e as f64;
                e -= 1;
            }
            v *= x[k].powi(e);
        }
        if skip.iter().any(|s| !self.powers.iter().any(|(k, _)| k == s)) {
            return 0.0;
        }
        v
    }
}

/// Metric whose entries are monomials in the coordinates. All shipped model
/// metrics have this form (entries are constants times powers of the
/// spreads), which gives exact derivatives for free.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialMetric {
    dim: usize,
    entries: Vec<Monomial>,
    positive_coords: Vec<usize>,
}

impl MonomialMetric {
    /// Constant metric; every point is in the domain.
    pub fn constant(g: &SymMatrix) -> Self {
        let n = g.dim();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                if g.get(i, j) != 0.0 {
                    entries.push(Monomial {
                        i,
                        j,
                        coef: g.get(i, j),
                        powers: vec![],
                    });
                }
            }
        }
        Self {
            dim: n,
            entries,
            positive_coords: vec![],
        }
    }

    /// Equal-variance correlated model, coordinates `(mu_x, mu_y, sigma)`.
    pub fn reduced(r: CorrelationCoefficient) -> Self {
        let rv = r.value();
        let omr2 = r.one_minus_sq();
        let e = |i, j, coef| Monomial {
            i,
            j,
            coef,
            powers: vec![(2, -2)],
        };
        Self {
            dim: 3,
            entries: vec![
                e(0, 0, 1.0 / omr2),
                e(1, 1, 1.0 / omr2),
                e(1, 0, -rv / (2.0 * omr2)),
                e(2, 2, 4.0),
            ],
            positive_coords: vec![2],
        }
    }

    /// Full bivariate model, coordinates `(mu_x, sigma_x, mu_y, sigma_y)`.
    pub fn full(r: CorrelationCoefficient) -> Self {
        let rv = r.value();
        let omr2 = r.one_minus_sq();
        let e = |i, j, coef, powers: Vec<(usize, i32)>| Monomial { i, j, coef, powers };
        Self {
            dim: 4,
            entries: vec![
                e(0, 0, 1.0 / omr2, vec![(1, -2)]),
                e(1, 1, (2.0 - rv * rv) / omr2, vec![(1, -2)]),
                e(2, 2, 1.0 / omr2, vec![(3, -2)]),
                e(3, 3, (2.0 - rv * rv) / omr2, vec![(3, -2)]),
                e(2, 0, -rv / omr2, vec![(1, -1), (3, -1)]),
                e(3, 1, -rv * rv / omr2, vec![(1, -1), (3, -1)]),
            ],
            positive_coords: vec![1, 3],
        }
    }

    /// Product of `n` independent normals, coordinates
    /// `(mu_1, sigma_1, ..., mu_n, sigma_n)`.
    pub fn diagonal(n: usize) -> Self {
        let mut entries = Vec::new();
        for j in 0..n {
            let s = 2 * j + 1;
            entries.push(Monomial {
                i: 2 * j,
                j: 2 * j,
                coef: 1.0,
                powers: vec![(s, -2)],
            });
            entries.push(Monomial {
                i: s,
                j: s,
                coef: 2.0,
                powers: vec![(s, -2)],
            });
        }
        Self {
            dim: 2 * n,
            entries,
            positive_coords: (0..n).map(|j| 2 * j + 1).collect(),
        }
    }

    fn assemble(&self, x: &[f64], skip: &[usize]) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.dim);
        for e in &self.entries {
            m.set(e.i, e.j, m.get(e.i, e.j) + e.eval(x, skip));
        }
        m
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if !self.in_domain(x) {
            return Err(Error::DomainViolation(format!("{x:?}")));
        }
        Ok(())
    }
}

impl Metric for MonomialMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x.iter().all(|v| v.is_finite())
            && self.positive_coords.iter().all(|&k| x[k] > 0.0)
    }

    fn metric(&self, x: &[f64]) -> Result<SymMatrix> {
        self.check(x)?;
        Ok(self.assemble(x, &[]))
    }

    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<SymMatrix>>> {
        Some(
            self.check(x)
                .map(|_| (0..self.dim).map(|k| self.assemble(x, &[k])).collect()),
        )
    }

    fn hessian(&self, x: &[f64]) -> Option<Result<Vec<Vec<SymMatrix>>>> {
        Some(self.check(x).map(|_| {
            (0..self.dim)
                .map(|k| (0..self.dim).map(|l| self.assemble(x, &[k, l])).collect())
                .collect()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{fisher_metric_analytic_4d, fisher_metric_diagonal, fisher_metric_reduced, DiagonalGaussianProduct};
    use crate::params::{ModelParams3, ModelParams4};

    fn r(v: f64) -> CorrelationCoefficient {
        CorrelationCoefficient::new(v).unwrap()
    }

    #[test]
    fn monomial_fields_match_model_constructors() {
        let p3 = ModelParams3::new(0.3, -1.0, 1.7, r(0.4)).unwrap();
        let g = MonomialMetric::reduced(r(0.4)).metric(&p3.coords()).unwrap();
        assert!(g.max_abs_diff(&fisher_metric_reduced(&p3)) < 1e-15);

        let p4 = ModelParams4::new(0.3, 0.8, -1.0, 2.1, r(-0.6)).unwrap();
        let g = MonomialMetric::full(r(-0.6)).metric(&p4.coords()).unwrap();
        assert!(g.max_abs_diff(&fisher_metric_analytic_4d(&p4)) < 1e-15);

        let d = DiagonalGaussianProduct::new(vec![0.0, 1.0, 2.0], vec![0.5, 1.5, 3.0]).unwrap();
        let g = MonomialMetric::diagonal(3)
            .metric(&[0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
            .unwrap();
        assert!(g.max_abs_diff(&fisher_metric_diagonal(&d)) < 1e-15);
    }

    #[test]
    fn analytic_and_fd_jets_agree() {
        let x = [0.4, 1.3, -0.7, 0.6];
        let tol = Tolerances::default();
        let a = MetricField::new(MonomialMetric::full(r(0.7)), DerivativeMode::Analytic)
            .jet(&x, &tol, true)
            .unwrap();
        let f = MetricField::new(MonomialMetric::full(r(0.7)), DerivativeMode::FiniteDifference)
            .jet(&x, &tol, true)
            .unwrap();
        for k in 0..4 {
            let scale = a.dg[k].max_abs().max(1.0);
            assert!(a.dg[k].max_abs_diff(&f.dg[k]) < 1e-8 * scale);
            for l in 0..4 {
                let (ah, fh) = (&a.ddg.as_ref().unwrap()[k][l], &f.ddg.as_ref().unwrap()[k][l]);
                assert!(ah.max_abs_diff(fh) < 1e-6 * ah.max_abs().max(1.0), "k={k} l={l}");
            }
        }
    }

    #[test]
    fn domain_violation_outside() {
        let field = MetricField::new(MonomialMetric::reduced(r(0.2)), DerivativeMode::FiniteDifference);
        let err = field.jet(&[0.0, 0.0, -1.0], &Tolerances::default(), false).unwrap_err();
        assert!(matches!(err, Error::DomainViolation(_)));
    }

    #[test]
    fn stencil_shrinks_once_near_boundary() {
        let field = MetricField::new(MonomialMetric::reduced(r(0.2)), DerivativeMode::FiniteDifference);
        let tol = Tolerances::default();
        // sigma slightly larger than the nominal step: the shrunken step fits.
        assert!(field.jet(&[0.0, 0.0, 4e-6], &tol, false).is_ok());
        // sigma smaller than a tenth of the step: the stencil cannot fit.
        assert!(matches!(
            field.jet(&[0.0, 0.0, 1e-7], &tol, false),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn analytic_mode_requires_derivatives() {
        struct Plain;
        impl Metric for Plain {
            fn dim(&self) -> usize {
                2
            }
            fn in_domain(&self, _: &[f64]) -> bool {
                true
            }
            fn metric(&self, _: &[f64]) -> Result<SymMatrix> {
                Ok(SymMatrix::identity(2))
            }
        }
        let field = MetricField::new(Plain, DerivativeMode::Analytic);
        assert!(matches!(
            field.jet(&[0.0, 0.0], &Tolerances::default(), false),
            Err(Error::AnalyticDerivativesUnavailable)
        ));
    }
}
