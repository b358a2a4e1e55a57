//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is numerically singular (pivot {pivot} below threshold at step {step})")]
    SingularMatrix { step: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("k-means needs at least k points ({n} points for k={k})")]
    TooFewPoints { n: usize, k: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("example {example_id} has no inherent view structure")]
    NoInherentViews { example_id: u8 },

    #[error("cannot split {d} features into {v} views")]
    TooManyViews { d: usize, v: usize },

    #[error("feature {index} is constant; correlation undefined")]
    DegenerateFeature { index: usize },

    #[error("feature index {index} out of range for {d} columns")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("view partition is invalid: {0}")]
    InvalidPartition(String),

    #[error("coupling rho={rho} violates rho*(V-1) < min gamma ({min_gamma})")]
    IllPosedCoupling { rho: f64, min_gamma: f64 },

    #[error("partition does not match the training partition")]
    PartitionMismatch,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("affinity graph has a zero-degree node (index {index})")]
    DegenerateGraph { index: usize },

    #[error("Davies-Bouldin index needs at least 2 non-empty clusters")]
    SingleCluster,

    #[error("class {label} has {count} members, fewer than {k} folds")]
    ClassTooSmall { label: i64, count: usize, k: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("io error at {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
