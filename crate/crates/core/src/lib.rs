//! Copula-statistic based component analysis (CCCA).
//!
//! Blind separation of linearly mixed, statistically dependent sources. The
//! de-mixing matrix minimises a kernel estimate of the Kullback-Leibler
//! divergence between the copula of the recovered signals and a parametric
//! source copula whose parameter is predicted from the CoS dependence index.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod copula;
pub mod empirical;
pub mod error;
pub mod metrics;
pub mod regression;
pub mod scalar;
pub mod separation;
pub mod signal;
pub mod special;

pub use copula::{CopulaFamily, CopulaModel, CopulaSample};
pub use empirical::{cos_index, pseudo_observations, PseudoObservations};
pub use error::{Error, Result};
pub use metrics::{isr, match_sources, snr_db, ChannelAssignment};
pub use regression::{estimate_alpha, fit_alpha_regression, predict_alpha, RegressionCoefficients, TrainingGrid};
pub use scalar::Real;
pub use separation::{
    cca_separate, ccca_separate, kl_divergence_estimate, kl_gradient, AlphaUpdate, Contrast, ConvergenceStatus,
    Margins, SeparationConfig, SeparationResult, SeparationTrace, StepRule,
};
pub use signal::{Matrix, SignalMatrix, SignalRole};

pub type CopulaModel64 = CopulaModel<f64>;
pub type SignalMatrix64 = SignalMatrix<f64>;
pub type Matrix64 = Matrix<f64>;
pub type PseudoObservations64 = PseudoObservations<f64>;
pub type RegressionCoefficients64 = RegressionCoefficients<f64>;
