//! Post-selection inference for high-dimensional linear regression.
//!
//! The pipeline: fit a lasso on a standardized design, expand the selected
//! model with deterministic and randomly injected coordinates until the
//! expanded set is large enough to screen the signal with high probability,
//! then correct the lasso shrinkage by a one-step update through a block
//! lower-triangular ridge approximation of the Gram matrix. The corrected
//! coefficients admit coordinate-wise confidence intervals and chi-square or
//! trace-normalized group tests.

pub mod data;
pub mod debias;
pub mod dist;
pub mod error;
pub mod expand;
pub mod lasso;
pub mod linalg;
pub mod wald;

pub use error::{Error, Result};
