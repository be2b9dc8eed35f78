//! Linear discriminative subspace models: PCA, contrastive PCA, dPCA and
//! multi-background dPCA.
//!
//! Every model reduces to a pencil eigenproblem on biased sample covariances.
//! dPCA maximizes the ratio of projected target variance to projected
//! background variance; the multi-background variant pools the background
//! covariances with convex weights before solving the same pencil.

use ndarray::{Array1, Array2, ArrayView2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    generalized_eig_top_ridged, sample_covariance, spd_cholesky, sym_eig_top, Dataset, EigenPairs,
    SymmetricMatrix,
};

/// How basis vectors are scaled when data are projected.
///
/// Stored basis columns always have unit Euclidean norm. `Background`
/// rescales each column `u` to `u / sqrt(u^T B u)` at projection time, where
/// `B` is the (pooled) background covariance the model was fitted against,
/// so that every projected background has unit variance along each
/// component. For PCA and cPCA `B` is the identity and the two coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Euclidean,
    #[default]
    Background,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinearMethod {
    Pca,
    Cpca { alpha: f64 },
    Dpca,
    Mdpca,
}

/// A fitted projection basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceModel {
    method: LinearMethod,
    basis: Array2<f64>,
    eigenvalues: Array1<f64>,
    background_scales: Array1<f64>,
    target_mean: Array1<f64>,
    background_means: Vec<Array1<f64>>,
    weights: Option<Vec<f64>>,
    normalization: Normalization,
}

/// Projected samples, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coordinates: Array2<f64>,
}

impl Embedding {
    pub fn n_samples(&self) -> usize {
        self.coordinates.nrows()
    }

    pub fn n_components(&self) -> usize {
        self.coordinates.ncols()
    }
}

impl SubspaceModel {
    /// Wraps an explicit basis, e.g. one loaded from disk. Columns are used
    /// as given; no background scaling is applied.
    pub fn from_basis(basis: Array2<f64>, eigenvalues: Array1<f64>, target_mean: Array1<f64>) -> Result<Self> {
        if basis.nrows() != target_mean.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.nrows(),
                found: target_mean.len(),
            });
        }
        if basis.ncols() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.ncols(),
                found: eigenvalues.len(),
            });
        }
        let d = basis.ncols();
        Ok(Self {
            method: LinearMethod::Pca,
            basis,
            eigenvalues,
            background_scales: Array1::ones(d),
            target_mean,
            background_means: Vec::new(),
            weights: None,
            normalization: Normalization::Euclidean,
        })
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn method(&self) -> &LinearMethod {
        &self.method
    }

    /// Unit-norm basis, `D x d`.
    pub fn basis(&self) -> ArrayView2<'_, f64> {
        self.basis.view()
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    /// Per-column factors `1 / sqrt(u^T B u)`.
    pub fn background_scales(&self) -> &Array1<f64> {
        &self.background_scales
    }

    pub fn target_mean(&self) -> &Array1<f64> {
        &self.target_mean
    }

    pub fn background_means(&self) -> &[Array1<f64>] {
        &self.background_means
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn n_components(&self) -> usize {
        self.basis.ncols()
    }

    /// The matrix data are multiplied by in [`project`].
    pub fn projection_basis(&self) -> Array2<f64> {
        match self.normalization {
            Normalization::Euclidean => self.basis.clone(),
            Normalization::Background => &self.basis * &self.background_scales,
        }
    }
}

fn check_dims(expected: usize, data: &Dataset) -> Result<()> {
    if data.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: data.dim(),
        });
    }
    Ok(())
}

pub(crate) fn validate_weights(weights: &[f64], count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::NoBackgrounds);
    }
    if weights.len() != count {
        return Err(Error::WeightCount {
            expected: count,
            found: weights.len(),
        });
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::NegativeWeight);
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::WeightSum { sum });
    }
    Ok(())
}

fn scales_for(pairs: &EigenPairs, metric: &SymmetricMatrix) -> Array1<f64> {
    pairs
        .vectors
        .columns()
        .into_iter()
        .map(|u| 1.0 / metric.quadratic_form(u).sqrt())
        .collect()
}

/// Standard PCA: leading eigenvectors of the target covariance.
pub fn fit_pca(target: &Dataset, d: usize) -> Result<SubspaceModel> {
    let cxx = sample_covariance(target)?;
    let pairs = sym_eig_top(&cxx, d)?;
    Ok(SubspaceModel {
        method: LinearMethod::Pca,
        background_scales: Array1::ones(d),
        basis: pairs.vectors,
        eigenvalues: pairs.values,
        target_mean: target.mean().to_owned(),
        background_means: Vec::new(),
        weights: None,
        normalization: Normalization::default(),
    })
}

/// Contrastive PCA: leading eigenvectors of `C_xx - alpha C_yy`.
pub fn fit_cpca(target: &Dataset, background: &Dataset, alpha: f64, d: usize) -> Result<SubspaceModel> {
    if !(alpha >= 0.0) {
        return Err(Error::NegativeAlpha(alpha));
    }
    check_dims(target.dim(), background)?;
    let cxx = sample_covariance(target)?;
    let cyy = sample_covariance(background)?;
    let contrast = cxx.add_scaled(-alpha, &cyy)?;
    let pairs = sym_eig_top(&contrast, d)?;
    Ok(SubspaceModel {
        method: LinearMethod::Cpca { alpha },
        background_scales: Array1::ones(d),
        basis: pairs.vectors,
        eigenvalues: pairs.values,
        target_mean: target.mean().to_owned(),
        background_means: vec![background.mean().to_owned()],
        weights: None,
        normalization: Normalization::default(),
    })
}

/// Discriminative PCA against a single background.
pub fn fit_dpca(target: &Dataset, background: &Dataset, d: usize) -> Result<SubspaceModel> {
    fit_dpca_ridged(target, background, d, 0.0)
}

/// [`fit_dpca`] with the background covariance regularized by
/// `ridge * (tr(C_yy)/D) * I`.
pub fn fit_dpca_ridged(target: &Dataset, background: &Dataset, d: usize, ridge: f64) -> Result<SubspaceModel> {
    let mut model = fit_mdpca_ridged(target, std::slice::from_ref(background), &[1.0], d, ridge)?;
    model.method = LinearMethod::Dpca;
    model.weights = None;
    Ok(model)
}

/// Multi-background dPCA with convex weights over the backgrounds.
pub fn fit_mdpca(target: &Dataset, backgrounds: &[Dataset], weights: &[f64], d: usize) -> Result<SubspaceModel> {
    fit_mdpca_ridged(target, backgrounds, weights, d, 0.0)
}

pub fn fit_mdpca_ridged(
    target: &Dataset,
    backgrounds: &[Dataset],
    weights: &[f64],
    d: usize,
    ridge: f64,
) -> Result<SubspaceModel> {
    validate_weights(weights, backgrounds.len())?;
    for bg in backgrounds {
        check_dims(target.dim(), bg)?;
    }
    let cxx = sample_covariance(target)?;
    let covariances = backgrounds.iter().map(sample_covariance).collect::<Result<Vec<_>>>()?;
    let pooled = if covariances.len() == 1 && weights[0] == 1.0 {
        covariances[0].clone()
    } else {
        let mut acc = SymmetricMatrix::zeros(cxx.order());
        for (c, &w) in covariances.iter().zip(weights) {
            acc = acc.add_scaled(w, c)?;
        }
        acc
    };
    if !(ridge >= 0.0) {
        return Err(Error::NegativeRidge(ridge));
    }
    let metric = pooled.add_diagonal(ridge * pooled.trace() / pooled.order() as f64);
    let pairs = generalized_eig_top_ridged(&cxx, &pooled, d, ridge)?;
    Ok(SubspaceModel {
        method: LinearMethod::Mdpca,
        background_scales: scales_for(&pairs, &metric),
        basis: pairs.vectors,
        eigenvalues: pairs.values,
        target_mean: target.mean().to_owned(),
        background_means: backgrounds.iter().map(|b| b.mean().to_owned()).collect(),
        weights: Some(weights.to_vec()),
        normalization: Normalization::default(),
    })
}

/// Projects samples onto the model's components.
///
/// Centered datasets are projected as they are; raw datasets are first
/// centered with the training target mean.
pub fn project(model: &SubspaceModel, data: &Dataset) -> Result<Embedding> {
    check_dims(model.dim(), data)?;
    let basis = model.projection_basis();
    let coordinates = if data.is_centered() {
        data.rows().dot(&basis)
    } else {
        (&data.rows() - &model.target_mean).dot(&basis)
    };
    Ok(Embedding { coordinates })
}

/// Ratio-trace objective `Tr[(U^T C_yy U)^{-1} U^T C_xx U]`.
pub fn ratio_trace(cxx: &SymmetricMatrix, cyy: &SymmetricMatrix, basis: ArrayView2<f64>) -> Result<f64> {
    let num = basis.t().dot(&cxx.as_array()).dot(&basis);
    let den = SymmetricMatrix::symmetrize(basis.t().dot(&cyy.as_array()).dot(&basis))?;
    let l = spd_cholesky(&den)?;
    // Tr[D^{-1} N] = Tr[L^{-1} N L^{-T}]
    let w = l.solve_lower_matrix(num.view());
    let inner = l.solve_lower_matrix(w.t());
    Ok(inner.diag().sum())
}
