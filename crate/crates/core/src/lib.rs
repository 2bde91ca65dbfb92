//! Subsampled residual bootstrap (SRB) and classical residual bootstrap (RB)
//! for linear, logistic and Poisson regression.
//!
//! The pipeline is: fit a model ([`fit`]), build centered residuals
//! ([`residuals`]), precompute the resampling operator and draw replicates
//! ([`resampler`]). [`simbench`] reproduces the Monte Carlo comparison of the
//! two schemes and [`pipeline`] handles tabular data ingestion and
//! collinearity pruning.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod model;
pub mod pipeline;
pub mod resampler;
pub mod residuals;
pub mod simbench;

pub use error::{Error, Result};
pub use fit::{fit, fit_irls, fit_ols, hat_diagonals, FittedModel, IrlsOptions};
pub use model::{
    family_mean, family_variance, CoefficientVector, DesignMatrix, Family, ResponseKind, ResponseVector, RngStream,
};
pub use resampler::{
    bootstrap_variance, rb_replicate, run_bootstrap, run_with_operator, srb_replicate, starred_sigma, BootstrapConfig,
    BootstrapOperator, BootstrapResult, Root, SubsampleSize,
};
pub use residuals::{
    centered_modified_residuals, centered_pearson_residuals, centered_residuals, residual_scale, ResidualSet,
};
