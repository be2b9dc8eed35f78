use ndarray::{s, Array1, Array2, Axis};
use serde::Serialize;

use super::system::{assemble, KernelSpec, KernelSystem};
use crate::error::{Error, Result};
use crate::linalg::{generalized_eig_top, sym_eig_top, Dataset, SymmetricMatrix};
use crate::linear::{validate_weights, Embedding, Normalization};

/// Regularization used for a single background when none is given.
pub const DEFAULT_EPSILON: f64 = 1e-3;
/// Regularization used for several backgrounds when none is given.
pub const DEFAULT_MULTI_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DualMethod {
    Kpca,
    Kdpca,
    Kmdpca,
}

/// Row block of `K A` to return from [`embed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Target,
    Background(usize),
    All,
}

/// A fitted dual model: `N x d` coefficients over the assembled kernel system.
#[derive(Debug, Clone)]
pub struct DualModel {
    method: DualMethod,
    coefficients: Array2<f64>,
    eigenvalues: Array1<f64>,
    background_scales: Array1<f64>,
    kernel: KernelSpec,
    epsilon: Option<f64>,
    weights: Option<Vec<f64>>,
    system: KernelSystem,
    normalization: Normalization,
}

impl DualModel {
    pub fn method(&self) -> DualMethod {
        self.method
    }

    /// Unit-norm dual vectors, one per column.
    pub fn coefficients(&self) -> &Array2<f64> {
        &self.coefficients
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    /// `1 / sqrt(a^T B a)` per column, `B` the regularized background pencil.
    pub fn background_scales(&self) -> &Array1<f64> {
        &self.background_scales
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn system(&self) -> &KernelSystem {
        &self.system
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn n_components(&self) -> usize {
        self.coefficients.ncols()
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    /// Coefficients with the active normalization applied.
    pub fn projection_coefficients(&self) -> Array2<f64> {
        match self.normalization {
            Normalization::Euclidean => self.coefficients.clone(),
            Normalization::Background => &self.coefficients * &self.background_scales.view().insert_axis(Axis(0)),
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveEpsilon(epsilon))
    }
}

fn scales_for(coefficients: &Array2<f64>, metric: &SymmetricMatrix) -> Array1<f64> {
    coefficients
        .axis_iter(Axis(1))
        .map(|a| {
            let q = metric.quadratic_form(a);
            if q > 0.0 {
                1.0 / q.sqrt()
            } else {
                1.0
            }
        })
        .collect()
}

/// Kernel dPCA with one background set.
pub fn fit_kdpca(
    target: &Dataset,
    background: &Dataset,
    kernel: &KernelSpec,
    epsilon: f64,
    d: usize,
) -> Result<DualModel> {
    let mut model = fit_kmdpca(target, std::slice::from_ref(background), kernel, &[1.0], epsilon, d)?;
    model.method = DualMethod::Kdpca;
    model.weights = None;
    Ok(model)
}

/// Kernel dPCA against a weighted pool of background sets.
pub fn fit_kmdpca(
    target: &Dataset,
    backgrounds: &[Dataset],
    kernel: &KernelSpec,
    weights: &[f64],
    epsilon: f64,
    d: usize,
) -> Result<DualModel> {
    check_epsilon(epsilon)?;
    if backgrounds.is_empty() {
        return Err(Error::NoBackgrounds);
    }
    validate_weights(weights, backgrounds.len())?;
    let system = assemble(target, backgrounds, kernel)?;
    if d == 0 || d > system.n_total() {
        return Err(Error::InvalidComponentCount {
            requested: d,
            max: system.n_total(),
        });
    }
    let a = system.target_pencil()?;
    let b = system.background_pencil(weights, epsilon)?;
    let pairs = generalized_eig_top(&a, &b, d)?;
    let background_scales = scales_for(&pairs.vectors, &b);
    Ok(DualModel {
        method: DualMethod::Kmdpca,
        coefficients: pairs.vectors,
        eigenvalues: pairs.values,
        background_scales,
        kernel: *kernel,
        epsilon: Some(epsilon),
        weights: Some(weights.to_vec()),
        system,
        normalization: Normalization::default(),
    })
}

/// Kernel PCA on the target alone: top eigenvectors of its centered gram.
///
/// The returned model lives on a system whose only block is the target, so
/// [`Block::Target`] and [`Block::All`] coincide.
pub fn fit_kpca(target: &Dataset, kernel: &KernelSpec, d: usize) -> Result<DualModel> {
    let system = KernelSystem::target_only(target, kernel)?;
    let m = system.n_total();
    if d == 0 || d > m {
        return Err(Error::InvalidComponentCount { requested: d, max: m });
    }
    let k = SymmetricMatrix::symmetrize(system.k().to_owned())?;
    let pairs = sym_eig_top(&k, d)?;
    Ok(DualModel {
        method: DualMethod::Kpca,
        background_scales: Array1::ones(d),
        coefficients: pairs.vectors,
        eigenvalues: pairs.values,
        kernel: *kernel,
        epsilon: None,
        weights: None,
        system,
        normalization: Normalization::Euclidean,
    })
}

/// Rows of `K A` for the selected block.
pub fn embed(model: &DualModel, which: Block) -> Result<Embedding> {
    let system = &model.system;
    let range = match which {
        Block::All => 0..system.n_total(),
        Block::Target => system.target_range(),
        Block::Background(k) => system
            .blocks()
            .get(k + 1)
            .cloned()
            .ok_or(Error::InvalidBlock {
                index: k,
                count: system.n_backgrounds(),
            })?,
    };
    let rows = system.k().slice_move(s![range, ..]);
    Ok(Embedding {
        coordinates: rows.dot(&model.projection_coefficients()),
    })
}
