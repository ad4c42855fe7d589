use super::field::{Metric, MetricField};
use crate::error::{Error, Result};
use crate::linalg::{general_determinant, SymMatrix};

/// Change of coordinates, expressed from the new coordinates back to the
/// original ones.
pub trait Reparametrization: Send + Sync {
    fn dim(&self) -> usize;

    /// Original coordinates of a point given in new coordinates.
    fn to_original(&self, y: &[f64]) -> Vec<f64>;

    /// Jacobian `∂x/∂y` (row `i` = original coordinate `i`).
    fn jacobian(&self, y: &[f64]) -> Vec<Vec<f64>>;
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityMap(pub usize);

impl Reparametrization for IdentityMap {
    fn dim(&self) -> usize {
        self.0
    }
    fn to_original(&self, y: &[f64]) -> Vec<f64> {
        y.to_vec()
    }
    fn jacobian(&self, _y: &[f64]) -> Vec<Vec<f64>> {
        (0..self.0)
            .map(|i| (0..self.0).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    }
}

/// Replaces coordinate `index` by its logarithm: `x[index] = exp(y[index])`.
#[derive(Debug, Clone, Copy)]
pub struct LogCoordinate {
    pub dim: usize,
    pub index: usize,
}

impl Reparametrization for LogCoordinate {
    fn dim(&self) -> usize {
        self.dim
    }
    fn to_original(&self, y: &[f64]) -> Vec<f64> {
        let mut x = y.to_vec();
        x[self.index] = y[self.index].exp();
        x
    }
    fn jacobian(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let mut j = IdentityMap(self.dim).jacobian(y);
        j[self.index][self.index] = y[self.index].exp();
        j
    }
}

fn checked_jacobian<R: Reparametrization + ?Sized>(reparam: &R, y: &[f64]) -> Result<Vec<Vec<f64>>> {
    let jac = reparam.jacobian(y);
    let det = general_determinant(&jac);
    let scale: f64 = jac
        .iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
        .product();
    if !det.is_finite() || det.abs() <= 1e-14 * scale {
        return Err(Error::SingularJacobian { det });
    }
    Ok(jac)
}

/// `g'(y) = Jᵀ g(x(y)) J` at the point `y` in new coordinates.
pub fn pullback_metric<M: Metric, R: Reparametrization + ?Sized>(
    field: &MetricField<M>,
    reparam: &R,
    point: &[f64],
) -> Result<SymMatrix> {
    if point.len() != reparam.dim() || reparam.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: point.len(),
        });
    }
    let jac = checked_jacobian(reparam, point)?;
    let x = reparam.to_original(point);
    if !field.metric.in_domain(&x) {
        return Err(Error::DomainViolation(format!("{x:?}")));
    }
    field.metric.metric(&x)?.congruence(&jac)
}

/// A metric expressed in reparametrized coordinates, usable wherever a
/// [`Metric`] is (finite-difference derivatives only).
#[derive(Debug, Clone)]
pub struct PullbackMetric<M, R> {
    pub base: M,
    pub reparam: R,
}

impl<M: Metric, R: Reparametrization> Metric for PullbackMetric<M, R> {
    fn dim(&self) -> usize {
        self.reparam.dim()
    }

    fn in_domain(&self, y: &[f64]) -> bool {
        y.len() == self.dim()
            && y.iter().all(|v| v.is_finite())
            && self.base.in_domain(&self.reparam.to_original(y))
    }

    fn metric(&self, y: &[f64]) -> Result<SymMatrix> {
        let jac = checked_jacobian(&self.reparam, y)?;
        self.base.metric(&self.reparam.to_original(y))?.congruence(&jac)
    }
}
