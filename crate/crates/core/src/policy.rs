//! Shared selection arithmetic used by every strategy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arm::ArmId;
use crate::rng::StreamRng;

/// How the train probability decays as a model accumulates sub-trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// `p = 1 - trains / cap`
    #[default]
    Linear,
    /// `p = 1 - exp(trains - cap)`, clamped to `[0, 1]`
    Exponential,
}

/// Optimistic index `mean + sqrt(E / pulls)`.
///
/// Panics if `pulls == 0`: arms always receive one sub-train before they are
/// indexed, so an unpulled arm here is a contract violation.
pub fn ucb_index(mean: f64, pulls: u32, exploration: f64) -> f64 {
    assert!(pulls >= 1, "ucb_index called with zero pulls");
    assert!(
        exploration >= 0.0,
        "exploration parameter must be non-negative"
    );
    mean + (exploration / f64::from(pulls)).sqrt()
}

/// Incorporate one reward into a running mean: `(reward + count * mean) /
/// (count + 1)` where `count` is the number of rewards already averaged.
pub fn running_mean_update(mean: f64, count: u32, reward: f64) -> f64 {
    (reward + f64::from(count) * mean) / (f64::from(count) + 1.0)
}

/// Probability of performing a sub-train (rather than spawning a mutant)
/// when the selected arm has absorbed `trains` of at most `cap` sub-trains.
/// Callers draw `X ~ Bernoulli(p)` and mutate on `X = 0`; the returned value
/// is the TRAIN probability, mirroring how the selection loop uses it.
///
/// Panics if `trains` is outside `1..=cap`.
pub fn mutation_probability(trains: u32, cap: u32, schedule: Schedule) -> f64 {
    assert!(trains >= 1, "arms are trained once before being indexed");
    assert!(
        trains <= cap,
        "train count {trains} exceeds the per-model cap {cap}"
    );
    match schedule {
        Schedule::Linear => 1.0 - f64::from(trains) / f64::from(cap),
        // exp(trains - cap) <= 1 for trains <= cap; the clamp guards float
        // rounding only.
        Schedule::Exponential => (1.0 - (f64::from(trains) - f64::from(cap)).exp()).clamp(0.0, 1.0),
    }
}

/// Index of the maximum score; exact ties are broken uniformly at random
/// from the dedicated tie-break stream. A unique maximum consumes no draw.
///
/// Panics on an empty slice.
pub fn argmax_arm(scores: &[(ArmId, f64)], tie_rng: &mut StreamRng) -> ArmId {
    assert!(!scores.is_empty(), "argmax over an empty score list");
    let best = scores
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<ArmId> = scores
        .iter()
        .filter(|&&(_, v)| v == best)
        .map(|&(id, _)| id)
        .collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[tie_rng.random_range(0..tied.len())]
    }
}
