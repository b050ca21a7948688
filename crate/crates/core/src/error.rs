use thiserror::Error;

use crate::copula::CopulaFamily;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dependence parameter {alpha} is outside the {family} domain")]
    InvalidParameter { family: CopulaFamily, alpha: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("channel {channel} has zero variance")]
    DegenerateSignal { channel: usize },

    #[error("non-finite value in channel {channel} at sample {sample}")]
    NonFinite { channel: usize, sample: usize },

    #[error("regression basis is rank deficient ({distinct} distinct CoS values, need 3)")]
    RankDeficient { distinct: usize },

    #[error("de-mixing matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("unsupported dimension p = {p}; only bivariate separation is implemented")]
    UnsupportedDimension { p: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
