//! Dense symmetric linear algebra.
//!
//! Everything here is double precision and single threaded so results are
//! bitwise reproducible for a fixed input. Covariances use the biased
//! normalization `(1/m) X^T X`.

mod cholesky;
mod dataset;
mod eigen;
mod matrix;

pub use cholesky::{spd_cholesky, LowerTriangular};
pub use dataset::{center, sample_covariance, Dataset};
pub use eigen::{generalized_eig_top, generalized_eig_top_ridged, sym_eig, sym_eig_top, EigenPairs};
pub use matrix::SymmetricMatrix;
