use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// A real symmetric matrix. Construction checks symmetry to
/// `1e-12 * max|A_ij|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Array2<f64>);

const SYMMETRY_TOL: f64 = 1e-12;

fn check_square(a: &ArrayView2<f64>) -> Result<()> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

/// Largest `|A_ij - A_ji|`.
pub(crate) fn max_asymmetry(a: &ArrayView2<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    worst
}

impl SymmetricMatrix {
    pub fn new(a: Array2<f64>) -> Result<Self> {
        check_square(&a.view())?;
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let asym = max_asymmetry(&a.view());
        if asym > SYMMETRY_TOL * scale || !asym.is_finite() {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(Self(a))
    }

    /// `(A + A^T) / 2`, for products that are symmetric in exact arithmetic.
    pub fn symmetrize(a: Array2<f64>) -> Result<Self> {
        check_square(&a.view())?;
        let n = a.nrows();
        let mut s = a;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (s[[i, j]] + s[[j, i]]);
                s[[i, j]] = v;
                s[[j, i]] = v;
            }
        }
        Ok(Self(s))
    }

    pub fn zeros(n: usize) -> Self {
        Self(Array2::zeros((n, n)))
    }

    pub fn identity(n: usize) -> Self {
        Self(Array2::eye(n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(Array2::from_diag(&ndarray::Array1::from(diag.to_vec())))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_array(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.0.diag().sum()
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &SymmetricMatrix) -> Result<Self> {
        if self.order() != other.order() {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                found: other.order(),
            });
        }
        Ok(Self(&self.0 + &(&other.0 * alpha)))
    }

    /// `self + delta * I`.
    pub fn add_diagonal(&self, delta: f64) -> Self {
        let mut a = self.0.clone();
        a.diag_mut().mapv_inplace(|v| v + delta);
        Self(a)
    }

    /// Quadratic form `v^T A v`.
    pub fn quadratic_form(&self, v: ndarray::ArrayView1<f64>) -> f64 {
        v.dot(&self.0.dot(&v))
    }
}
