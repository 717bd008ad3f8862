//! Simulated search spaces standing in for real model training.
//!
//! Both landscapes produce learning-curve rewards through the
//! [`SearchSpace`](crate::space::SearchSpace) interface: the vector
//! landscape scores configurations by Hamming distance to a hidden optimum
//! (so mutation is a small, informative move), while the tabular landscape
//! replays explicit per-configuration curves and neighbor lists, which makes
//! golden-trace fixtures possible.

use thiserror::Error;

pub mod tabular;
pub mod vector;

pub use tabular::{TabularArmSpec, TabularLandscape, TabularLandscapeSpec};
pub use vector::{OverfitSpec, VectorLandscape, VectorLandscapeSpec};

/// Rejected landscape specifications; the message names the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid landscape: {field}: {reason}")]
pub struct LandscapeError {
    pub field: &'static str,
    pub reason: String,
}

impl LandscapeError {
    pub(crate) fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}
