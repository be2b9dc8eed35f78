//! Discriminative PCA: linear and kernel subspace methods that find
//! directions with high target variance relative to one or more background
//! datasets, plus seeded synthetic generators and clustering metrics.
//!
//! ```
//! use dpca::{fit_dpca, project, Dataset};
//!
//! let target = Dataset::from_vecs(&[vec![3.0, 0.1], vec![-3.0, -0.1], vec![2.0, 0.2], vec![-2.0, -0.2]])?.centered();
//! let background = Dataset::from_vecs(&[vec![0.1, 2.0], vec![-0.1, -2.0], vec![0.2, 1.0], vec![-0.2, -1.0]])?.centered();
//! let model = fit_dpca(&target, &background, 1)?;
//! let embedding = project(&model, &target)?;
//! assert_eq!(embedding.coordinates.dim(), (4, 1));
//! # Ok::<(), dpca::Error>(())
//! ```

pub mod error;
pub mod eval;
pub mod kernel;
pub mod linalg;
pub mod linear;
pub mod synth;

pub use error::{Error, Result};
pub use eval::{clustering_error, evaluate, kmeans, scatter_ratio, EvaluationReport, KMeansResult, ScatterRatio};
pub use kernel::{
    assemble, embed, fit_kdpca, fit_kmdpca, fit_kpca, Block, DualMethod, DualModel, KernelSpec, KernelSystem,
};
pub use linalg::{center, generalized_eig_top, sample_covariance, sym_eig, Dataset, EigenPairs, SymmetricMatrix};
pub use linear::{
    fit_cpca, fit_dpca, fit_dpca_ridged, fit_mdpca, fit_mdpca_ridged, fit_pca, project, Embedding, LinearMethod,
    Normalization, SubspaceModel,
};
pub use synth::{LabeledDataset, SeededRng, SyntheticProtocol};
