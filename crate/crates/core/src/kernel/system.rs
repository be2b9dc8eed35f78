use std::ops::Range;

use ndarray::{s, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, Dataset, SymmetricMatrix};

/// Kernel function `kappa(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `a^T b`
    Linear,
    /// `(a^T b + offset)^degree`
    Polynomial { degree: u32, offset: f64 },
    /// `exp(-||a - b||^2 / (2 bandwidth^2))`
    Gaussian { bandwidth: f64 },
}

impl KernelSpec {
    /// Homogeneous degree-2 polynomial kernel `(a^T b)^2`.
    pub const fn poly2() -> Self {
        KernelSpec::Polynomial {
            degree: 2,
            offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { degree, offset } => {
                if degree == 0 {
                    return Err(Error::InvalidKernel("polynomial degree must be at least 1".into()));
                }
                if !offset.is_finite() {
                    return Err(Error::InvalidKernel("polynomial offset must be finite".into()));
                }
                Ok(())
            }
            KernelSpec::Gaussian { bandwidth } => {
                if !(bandwidth > 0.0 && bandwidth.is_finite()) {
                    return Err(Error::InvalidKernel("gaussian bandwidth must be positive".into()));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
        match *self {
            KernelSpec::Linear => a.dot(&b),
            KernelSpec::Polynomial { degree, offset } => (a.dot(&b) + offset).powi(degree as i32),
            KernelSpec::Gaussian { bandwidth } => {
                let dist2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
                (-dist2 / (2.0 * bandwidth * bandwidth)).exp()
            }
        }
    }
}

/// Cross gram matrix with entries `kappa(a_i, b_j)`.
pub fn gram(kernel: &KernelSpec, a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<Array2<f64>> {
    kernel.validate()?;
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            found: b.ncols(),
        });
    }
    let k = match *kernel {
        KernelSpec::Linear => a.dot(&b.t()),
        KernelSpec::Polynomial { degree, offset } => {
            let mut k = a.dot(&b.t());
            k.mapv_inplace(|v| (v + offset).powi(degree as i32));
            k
        }
        KernelSpec::Gaussian { .. } => {
            let mut k = Array2::zeros((a.nrows(), b.nrows()));
            for (i, ai) in a.outer_iter().enumerate() {
                for (j, bj) in b.outer_iter().enumerate() {
                    k[[i, j]] = kernel.eval(ai, bj);
                }
            }
            k
        }
    };
    if let Some(((row, col), _)) = k.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteKernel { row, col });
    }
    Ok(k)
}

/// Removes row and column means: `K - (1/m) 1 K - (1/n) K 1 + (1/mn) 1 K 1`.
fn double_center(k: ArrayView2<f64>) -> Array2<f64> {
    let (m, n) = k.dim();
    let col_means = k.sum_axis(ndarray::Axis(0)) / m as f64;
    let row_means = k.sum_axis(ndarray::Axis(1)) / n as f64;
    let grand = col_means.sum() / n as f64;
    let mut out = k.to_owned();
    for ((i, j), v) in out.indexed_iter_mut() {
        *v = *v - col_means[j] - row_means[i] + grand;
    }
    out
}

/// Centers the gram matrix of a single dataset in feature space.
pub fn center_self(k: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (rows, cols) = k.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyDataset);
    }
    let c = double_center(k);
    Ok(SymmetricMatrix::symmetrize(c)?.into_inner())
}

/// Centers a cross gram `K_xy` (m x n) using each side's own feature mean.
///
/// Only `K_xy` enters the formula; the self grams are taken to check that
/// the shapes are conformable.
pub fn center_cross(k: ArrayView2<f64>, row_self: ArrayView2<f64>, col_self: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (m, n) = k.dim();
    if row_self.dim() != (m, m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: row_self.nrows(),
        });
    }
    if col_self.dim() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: col_self.nrows(),
        });
    }
    if m == 0 || n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(double_center(k))
}

/// The assembled block kernel matrix for one target and one or more
/// background sets, with the per-block row masks.
///
/// Block 0 is the target; block `k + 1` is background `k`. Every block of
/// `K` is centered with the feature means of its own row set and column set.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSystem {
    k: Array2<f64>,
    target_mask: Array2<f64>,
    background_masks: Vec<Array2<f64>>,
    blocks: Vec<Range<usize>>,
}

fn block_mask(k: &Array2<f64>, range: &Range<usize>) -> Array2<f64> {
    let mut mask = Array2::zeros(k.raw_dim());
    let scale = 1.0 / range.len() as f64;
    mask.slice_mut(s![range.clone(), ..])
        .assign(&(&k.slice(s![range.clone(), ..]) * scale));
    mask
}

/// Builds `K`, the target mask `K^x` and one mask `K^k` per background.
pub fn assemble(target: &Dataset, backgrounds: &[Dataset], kernel: &KernelSpec) -> Result<KernelSystem> {
    if backgrounds.is_empty() {
        return Err(Error::NoBackgrounds);
    }
    let sets: Vec<&Dataset> = std::iter::once(target).chain(backgrounds.iter()).collect();
    build(&sets, kernel)
}

fn build(sets: &[&Dataset], kernel: &KernelSpec) -> Result<KernelSystem> {
    kernel.validate()?;
    let dim = sets[0].dim();
    for s in &sets[1..] {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
    }
    let mut blocks = Vec::with_capacity(sets.len());
    let mut offset = 0;
    for s in sets {
        blocks.push(offset..offset + s.n_samples());
        offset += s.n_samples();
    }
    let n_total = offset;

    let mut k = Array2::zeros((n_total, n_total));
    for (i, a) in sets.iter().enumerate() {
        for (j, b) in sets.iter().enumerate().skip(i) {
            let raw = gram(kernel, a.rows(), b.rows())?;
            let centered = if i == j {
                center_self(raw.view())?
            } else {
                double_center(raw.view())
            };
            k.slice_mut(s![blocks[i].clone(), blocks[j].clone()]).assign(&centered);
            if i != j {
                k.slice_mut(s![blocks[j].clone(), blocks[i].clone()])
                    .assign(&centered.t());
            }
        }
    }

    let target_mask = block_mask(&k, &blocks[0]);
    let background_masks = blocks[1..].iter().map(|r| block_mask(&k, r)).collect();
    Ok(KernelSystem {
        k,
        target_mask,
        background_masks,
        blocks,
    })
}

impl KernelSystem {
    /// A system with the target block only, as used by kernel PCA.
    pub fn target_only(target: &Dataset, kernel: &KernelSpec) -> Result<Self> {
        build(&[target], kernel)
    }

    /// The centered block matrix `K` (N x N).
    pub fn k(&self) -> ArrayView2<'_, f64> {
        self.k.view()
    }

    /// `K^x`: target rows of `K` scaled by `1/m`, zero elsewhere.
    pub fn target_mask(&self) -> ArrayView2<'_, f64> {
        self.target_mask.view()
    }

    /// `K^k`: rows of background `index` scaled by `1/n_k`, zero elsewhere.
    pub fn background_mask(&self, index: usize) -> Result<ArrayView2<'_, f64>> {
        self.background_masks
            .get(index)
            .map(|m| m.view())
            .ok_or(Error::InvalidBlock {
                index,
                count: self.background_masks.len(),
            })
    }

    /// Row ranges: target first, then each background in order.
    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn target_range(&self) -> Range<usize> {
        self.blocks[0].clone()
    }

    pub fn n_backgrounds(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn n_total(&self) -> usize {
        self.k.nrows()
    }

    /// `K diag(iota) K` for the rows in `range`, with `iota = 1/|range|` on
    /// the block. This equals `K K^x` (or `K K^k`) and is assembled from the
    /// block columns directly.
    fn block_product(&self, range: &Range<usize>) -> Array2<f64> {
        let cols = self.k.slice(s![.., range.clone()]);
        cols.dot(&cols.t()) / range.len() as f64
    }

    /// Numerator of the dual pencil, `K K^x`.
    pub fn target_pencil(&self) -> Result<SymmetricMatrix> {
        SymmetricMatrix::symmetrize(self.block_product(&self.blocks[0]))
    }

    /// `K (sum_k w_k K^k) + epsilon I`.
    pub fn background_pencil(&self, weights: &[f64], epsilon: f64) -> Result<SymmetricMatrix> {
        if weights.len() != self.n_backgrounds() {
            return Err(Error::WeightCount {
                expected: self.n_backgrounds(),
                found: weights.len(),
            });
        }
        let n = self.n_total();
        let mut acc = Array2::<f64>::zeros((n, n));
        for (range, &w) in self.blocks[1..].iter().zip(weights) {
            if w != 0.0 {
                acc.scaled_add(w, &self.block_product(range));
            }
        }
        Ok(SymmetricMatrix::symmetrize(acc)?.add_diagonal(epsilon))
    }

    /// Smallest eigenvalue of `K`; non-negative up to rounding for any
    /// valid kernel.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let pairs = sym_eig(&SymmetricMatrix::symmetrize(self.k.clone())?)?;
        Ok(pairs.values[pairs.len() - 1])
    }

    /// `Some(lambda_min)` when `K` has an eigenvalue below
    /// `-tol * ||K||_F`, i.e. when it is not PSD to tolerance.
    pub fn psd_violation(&self, tol: f64) -> Result<Option<f64>> {
        let fro = self.k.iter().map(|v| v * v).sum::<f64>().sqrt();
        let min = self.min_eigenvalue()?;
        Ok((min < -tol * fro).then_some(min))
    }
}
