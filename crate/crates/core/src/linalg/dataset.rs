use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::SymmetricMatrix;
use crate::error::{Error, Result};

/// A sample matrix (one sample per row) plus the mean that was removed from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Array2<f64>,
    mean: Array1<f64>,
    centered: bool,
}

fn validate(rows: &ArrayView2<f64>) -> Result<()> {
    if rows.nrows() == 0 || rows.ncols() == 0 {
        return Err(Error::EmptyDataset);
    }
    for ((row, col), v) in rows.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(())
}

impl Dataset {
    /// Wraps raw (uncentered) samples. The stored mean is zero since nothing
    /// has been subtracted yet.
    pub fn from_rows(rows: Array2<f64>) -> Result<Self> {
        validate(&rows.view())?;
        let dim = rows.ncols();
        Ok(Self {
            rows,
            mean: Array1::zeros(dim),
            centered: false,
        })
    }

    /// Builds a dataset from nested rows; all rows must have the same length.
    pub fn from_vecs(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        let rows = Array2::from_shape_vec((rows.len(), dim), flat).expect("shape checked above");
        Self::from_rows(rows)
    }

    /// Returns the centered version of this dataset (a no-op if already centered).
    pub fn centered(self) -> Self {
        if self.centered {
            return self;
        }
        let mean = self.rows.mean_axis(Axis(0)).expect("non-empty by construction");
        let rows = &self.rows - &mean;
        Self {
            rows,
            mean,
            centered: true,
        }
    }

    pub fn rows(&self) -> ArrayView2<'_, f64> {
        self.rows.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.rows.row(i)
    }

    /// Mean subtracted during centering (zero for raw datasets).
    pub fn mean(&self) -> ArrayView1<'_, f64> {
        self.mean.view()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn n_samples(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    /// Samples with the stored mean added back.
    pub fn original(&self) -> Array2<f64> {
        &self.rows + &self.mean
    }

    /// Applies `f` to every sample row, e.g. a rotation or scaling.
    pub fn map_rows(&self, f: impl Fn(ArrayView1<f64>) -> Array1<f64>) -> Result<Self> {
        let mapped: Vec<Array1<f64>> = self.rows.outer_iter().map(f).collect();
        let dim = mapped[0].len();
        let mut out = Array2::zeros((mapped.len(), dim));
        for (mut dst, src) in out.outer_iter_mut().zip(mapped) {
            dst.assign(&src);
        }
        let ds = Self::from_rows(out)?;
        Ok(if self.centered { ds.centered() } else { ds })
    }
}

/// Subtracts the column means from `data`.
pub fn center(data: ArrayView2<f64>) -> Result<Dataset> {
    validate(&data)?;
    Ok(Dataset::from_rows(data.to_owned())?.centered())
}

/// Biased sample covariance `(1/m) X^T X` of a centered dataset.
pub fn sample_covariance(data: &Dataset) -> Result<SymmetricMatrix> {
    if !data.is_centered() {
        return Err(Error::NotCentered);
    }
    let x = data.rows();
    let m = data.n_samples() as f64;
    let cov = x.t().dot(&x) / m;
    SymmetricMatrix::symmetrize(cov)
}
