//! Kernel gram matrices, the assembled block system and the dual models
//! fitted on it.

mod models;
mod system;

pub use models::{
    embed, fit_kdpca, fit_kmdpca, fit_kpca, Block, DualMethod, DualModel, DEFAULT_EPSILON, DEFAULT_MULTI_EPSILON,
};
pub use system::{assemble, center_cross, center_self, gram, KernelSpec, KernelSystem};
