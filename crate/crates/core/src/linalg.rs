//! Small dense symmetric matrices.
//!
//! Metric tensors here are at most a handful of rows, so everything is done
//! with direct Cholesky / elimination loops on a packed triangle.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense symmetric matrix. Only the lower triangle is stored; `(i, j)` and
/// `(j, i)` always read the same slot.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    packed: Vec<f64>,
}

#[inline]
fn slot(i: usize, j: usize) -> usize {
    let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            packed: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds a matrix from `f(i, j)`, evaluated only for `i >= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                m.packed[slot(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from full rows; the lower triangle wins if the input is not
    /// exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[slot(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.packed[slot(i, j)] = value;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            packed: self.packed.iter().map(|v| v * factor).collect(),
        }
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.packed
            .iter()
            .zip(&other.packed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.packed.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Dense product `self * other` (not symmetric in general).
    pub fn matmul(&self, other: &Self) -> Vec<Vec<f64>> {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum())
                    .collect()
            })
            .collect()
    }

    /// `Jᵀ · self · J` for a square `J` given row-major.
    pub fn congruence(&self, jac: &[Vec<f64>]) -> Result<Self> {
        let n = self.dim;
        if jac.len() != n || jac.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: jac.len(),
            });
        }
        Ok(Self::from_fn(n, |a, b| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += jac[i][a] * self.get(i, j) * jac[j][b];
                }
            }
            acc
        }))
    }

    /// Cholesky factor `L` (row-major, lower) with `self = L Lᵀ`.
    pub fn cholesky(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.dim;
        let mut l = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        Ok(l)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// Inverse of a symmetric positive-definite matrix via Cholesky.
    pub fn invert_spd(&self) -> Result<Self> {
        let n = self.dim;
        let l = self.cholesky()?;
        // L⁻¹ by forward substitution, then A⁻¹ = L⁻ᵀ L⁻¹.
        let mut linv = vec![vec![0.0; n]; n];
        for col in 0..n {
            for i in col..n {
                let mut s = if i == col { 1.0 } else { 0.0 };
                for k in col..i {
                    s -= l[i][k] * linv[k][col];
                }
                linv[i][col] = s / l[i][i];
            }
        }
        Ok(Self::from_fn(n, |i, j| {
            (i.max(j)..n).map(|k| linv[k][i] * linv[k][j]).sum()
        }))
    }

    /// Determinant by Gaussian elimination with partial pivoting; works for
    /// singular and indefinite matrices.
    pub fn determinant(&self) -> f64 {
        general_determinant(&self.rows())
    }
}

/// Free-function form of [`SymMatrix::invert_spd`].
pub fn invert_spd(m: &SymMatrix) -> Result<SymMatrix> {
    m.invert_spd()
}

/// Free-function form of [`SymMatrix::determinant`].
pub fn determinant(m: &SymMatrix) -> f64 {
    m.determinant()
}

/// Determinant of a general square matrix given as rows.
pub(crate) fn general_determinant(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let mut a = rows.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymMatrix")
            .field("dim", &self.dim)
            .field("rows", &self.rows())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reduced(r: f64, sigma: f64) -> SymMatrix {
        let s2 = sigma * sigma;
        let d = r * r - 1.0;
        SymMatrix::from_rows(&[
            vec![-1.0 / d / s2, r / (2.0 * d) / s2, 0.0],
            vec![r / (2.0 * d) / s2, -1.0 / d / s2, 0.0],
            vec![0.0, 0.0, 4.0 / s2],
        ])
        .unwrap()
    }

    #[test]
    fn symmetric_storage() {
        let mut m = SymMatrix::zeros(3);
        m.set(0, 2, 5.0);
        assert_eq!(m.get(2, 0), 5.0);
        assert_eq!(m.get(0, 2), 5.0);
    }

    #[test]
    fn identity_inverse() {
        let id = SymMatrix::identity(3);
        assert_eq!(id.invert_spd().unwrap(), id);
        assert_eq!(id.determinant(), 1.0);
    }

    #[test]
    fn diagonal_inverse() {
        let m = SymMatrix::diagonal(&[1.0, 1.0, 4.0]);
        let inv = m.invert_spd().unwrap();
        assert_eq!(inv, SymMatrix::diagonal(&[1.0, 1.0, 0.25]));
    }

    #[test]
    fn reduced_metric_inverse_matches_closed_form() {
        // Closed-form inverse of the reduced metric at r = 0.5, sigma = 1.
        let r: f64 = 0.5;
        let s2 = 1.0;
        let k = (r * r - 1.0) / (r * r - 4.0);
        let expected = SymMatrix::from_rows(&[
            vec![4.0 * k * s2, 2.0 * r * k * s2, 0.0],
            vec![2.0 * r * k * s2, 4.0 * k * s2, 0.0],
            vec![0.0, 0.0, 0.25 * s2],
        ])
        .unwrap();
        let inv = reduced(r, 1.0).invert_spd().unwrap();
        assert!(inv.max_abs_diff(&expected) < 1e-14, "{inv:?}");
    }

    #[test]
    fn reduced_metric_determinant() {
        assert!((reduced(0.0, 1.0).determinant() - 4.0).abs() < 1e-15);
        for &(r, s) in &[(0.3f64, 0.7f64), (0.9, 2.0), (-0.5, 1.3)] {
            let g = 4.0 * (4.0 - r * r) / (2.0 - 2.0 * r * r).powi(2) / s.powi(6);
            let det = reduced(r, s).determinant();
            assert!((det - g).abs() <= 1e-13 * g, "r={r} s={s}: {det} vs {g}");
        }
    }

    #[test]
    fn not_positive_definite() {
        let m = SymMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            m.invert_spd(),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
        assert_eq!(m.determinant(), -1.0);
        assert_eq!(SymMatrix::zeros(2).determinant(), 0.0);
    }

    #[test]
    fn congruence_with_identity() {
        let m = reduced(0.4, 1.5);
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(m.congruence(&id).unwrap(), m);
    }

    fn spd_strategy() -> impl Strategy<Value = SymMatrix> {
        (2usize..=4)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    prop::collection::vec(-1.0f64..1.0, n * n),
                    prop::collection::vec(0.05f64..3.0, n),
                )
            })
            .prop_map(|(n, b, d)| {
                // B Bᵀ + diag(d) is SPD with a bounded condition number.
                SymMatrix::from_fn(n, |i, j| {
                    let bb: f64 = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum();
                    bb + if i == j { d[i] } else { 0.0 }
                })
            })
    }

    proptest! {
        #[test]
        fn inverse_times_matrix_is_identity(m in spd_strategy()) {
            let inv = m.invert_spd().unwrap();
            let prod = m.matmul(&inv);
            for (i, row) in prod.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((v - e).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn determinant_of_inverse(m in spd_strategy()) {
            let d = m.determinant();
            let di = m.invert_spd().unwrap().determinant();
            prop_assert!((d * di - 1.0).abs() < 1e-10);
        }
    }
}
