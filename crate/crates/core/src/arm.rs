//! Per-arm bookkeeping.
//!
//! An arm is one candidate model. Its record keeps two counters that only
//! diverge under mutation-based strategies: `pulls` counts how often the arm
//! was *chosen* (sub-trains plus mutants spawned from it) while `trains`
//! counts sub-trains actually performed on the arm's own model. The empirical
//! mean covers exactly the arm's own `trains` rewards; rewards earned by its
//! mutants never enter it.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Arm identifier, dense within a run: initial arms get `0..K-1` in sampling
/// order, mutants are appended in creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArmId(pub usize);

impl ArmId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Outcome of a single sub-train: the reward and the arm's cumulative train
/// count after the update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOutcome {
    pub arm: ArmId,
    pub reward: f64,
    pub epoch: u32,
}

/// Mutable per-arm state owned by the strategy loop.
///
/// The mean is stored as `(reward_sum, trains)` and derived on demand, which
/// keeps it the exact arithmetic mean of the observed rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmRecord<C> {
    id: ArmId,
    config: C,
    reward_sum: f64,
    trains: u32,
    pulls: u32,
    parent: Option<ArmId>,
    train_progress: u32,
}

impl<C> ArmRecord<C> {
    /// Record for an arm that just received its first sub-train.
    /// `initial_progress` is the number of training epochs inherited before
    /// that sub-train (non-zero only for warm-started mutants).
    pub fn initialized(
        id: ArmId,
        config: C,
        parent: Option<ArmId>,
        first_reward: f64,
        initial_progress: u32,
    ) -> Self {
        Self {
            id,
            config,
            reward_sum: first_reward,
            trains: 1,
            pulls: 1,
            parent,
            train_progress: initial_progress + 1,
        }
    }

    pub fn id(&self) -> ArmId {
        self.id
    }

    pub fn config(&self) -> &C {
        &self.config
    }

    /// Empirical mean of this arm's own sub-train rewards.
    pub fn mean(&self) -> f64 {
        self.reward_sum / f64::from(self.trains)
    }

    /// Times the arm was chosen (sub-trains plus mutants spawned from it).
    pub fn pulls(&self) -> u32 {
        self.pulls
    }

    /// Sub-trains actually performed on the arm's model.
    pub fn trains(&self) -> u32 {
        self.trains
    }

    pub fn parent(&self) -> Option<ArmId> {
        self.parent
    }

    /// Training epochs absorbed by the underlying model. Equals `trains`
    /// except under warm start, where a mutant inherits part of its parent's
    /// progress.
    pub fn train_progress(&self) -> u32 {
        self.train_progress
    }

    /// Fold in one more sub-train reward.
    pub fn record_train(&mut self, reward: f64) -> TrainOutcome {
        self.reward_sum += reward;
        self.trains += 1;
        self.pulls += 1;
        self.train_progress += 1;
        TrainOutcome {
            arm: self.id,
            reward,
            epoch: self.trains,
        }
    }

    /// A mutant was spawned from this arm: the selection counts as a pull
    /// but the arm's own model was not trained.
    pub fn record_mutant_spawned(&mut self) {
        self.pulls += 1;
    }

    /// Restart the arm's model from scratch with a fresh first sub-train.
    /// Used by round-based strategies that re-train survivors with a bigger
    /// allocation instead of resuming the previous model.
    pub fn reset_instance(&mut self, first_reward: f64) {
        self.reward_sum = first_reward;
        self.trains = 1;
        self.pulls = 1;
        self.train_progress = 1;
    }
}
