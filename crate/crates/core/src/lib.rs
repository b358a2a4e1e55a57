//! Multi-view mid-fusion learning for high-dimensional low-sample-size data.
//!
//! The crate provides view construction by feature set partitioning, early /
//! mid / late fusion variants of kernel classifiers, neural classifiers and
//! spectral clustering, plus a benchmark harness that runs the synthetic
//! studies end to end.

pub mod bench;
pub mod clustering;
pub mod error;
pub mod nn;
pub mod fusion;
pub mod kernels;
pub mod metrics;
pub mod numerics;
pub mod seeding;
pub mod synth;
pub mod tuning;
pub mod views;

pub use error::{Error, Result};
