//! The search-space abstraction strategies run against.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("mutation impossible: {0}")]
    MutationImpossible(String),
    #[error("this search space does not support crossover")]
    CrossoverUnsupported,
    #[error("training curve exhausted: epoch {epoch} but curve has {len} entries")]
    CurveExhausted { epoch: u32, len: u32 },
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),
}

/// A pool of candidate models. `sub_train` is the only reward source and
/// always returns accuracies in `[0, 1]`. All randomness flows through the
/// caller-supplied stream, so equal seeds give equal outputs.
pub trait SearchSpace {
    /// Opaque configuration handle. Serializable so traces can carry it.
    type Config: Clone + std::fmt::Debug + PartialEq + Serialize + DeserializeOwned;

    /// Draw a fresh configuration.
    fn sample(&self, rng: &mut StreamRng) -> Self::Config;

    /// Produce a neighbor of a (possibly trained) configuration.
    /// `train_progress` is how many epochs the source model has absorbed,
    /// for spaces where mutants inherit trained state.
    fn mutate(
        &self,
        config: &Self::Config,
        train_progress: u32,
        rng: &mut StreamRng,
    ) -> Result<Self::Config, SpaceError>;

    /// Combine two configurations. Optional; the default declares it
    /// unsupported and callers fall back to mutation only.
    fn crossover(
        &self,
        a: &Self::Config,
        b: &Self::Config,
        rng: &mut StreamRng,
    ) -> Result<Self::Config, SpaceError> {
        let _ = (a, b, rng);
        Err(SpaceError::CrossoverUnsupported)
    }

    fn supports_crossover(&self) -> bool {
        false
    }

    /// Perform one sub-train on a model that has completed `epoch` epochs
    /// and return the validation accuracy after it.
    fn sub_train(
        &self,
        config: &Self::Config,
        epoch: u32,
        rng: &mut StreamRng,
    ) -> Result<f64, SpaceError>;

    /// JSON description of the space, embedded in trace headers. Carries
    /// enough detail to rebuild the space exactly.
    fn descriptor(&self) -> serde_json::Value;

    /// Ground-truth asymptotic accuracy of a configuration, when the space
    /// knows it.
    fn true_value(&self, config: &Self::Config) -> Option<f64>;

    /// Exhaustive scan for the best configuration and its asymptotic
    /// accuracy; ties resolve to the lexicographically smallest config.
    fn oracle_best(&self) -> Result<(Self::Config, f64), SpaceError>;
}
