use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::SymmetricMatrix;
use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `L` with `L L^T = B`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular(Array2<f64>);

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// Fails with the index of the first pivot that is not strictly positive.
pub fn spd_cholesky(b: &SymmetricMatrix) -> Result<LowerTriangular> {
    let a = b.as_array();
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / ljj;
        }
    }
    Ok(LowerTriangular(l))
}

impl LowerTriangular {
    pub fn as_array(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    /// `L L^T`.
    pub fn reconstruct(&self) -> Array2<f64> {
        self.0.dot(&self.0.t())
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: ArrayView1<f64>) -> Array1<f64> {
        let l = &self.0;
        let n = l.nrows();
        let mut x = b.to_owned();
        for i in 0..n {
            let row = l.row(i);
            let mut s = x[i];
            for k in 0..i {
                s -= row[k] * x[k];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solves `L^T x = b`.
    pub fn solve_upper(&self, b: ArrayView1<f64>) -> Array1<f64> {
        let l = &self.0;
        let n = l.nrows();
        let mut x = b.to_owned();
        for i in (0..n).rev() {
            x[i] /= l[[i, i]];
            let xi = x[i];
            // column i of L^T above the diagonal is row i of L left of it
            let row = l.row(i);
            for k in 0..i {
                x[k] -= row[k] * xi;
            }
        }
        x
    }

    /// `L^{-1} M`, column by column.
    pub fn solve_lower_matrix(&self, m: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(m.raw_dim());
        for (j, col) in m.columns().into_iter().enumerate() {
            out.column_mut(j).assign(&self.solve_lower(col));
        }
        out
    }
}
