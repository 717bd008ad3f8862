//! Optimistic fixed-budget exploration.
//!
//! Samples `K` untrained models, gives each one sub-train, then for the
//! remaining `T - K` rounds trains the arm maximizing
//! `mean + sqrt(E / pulls)`. The output is the arm with the best empirical
//! mean. Consumes exactly `T` sub-trains.

use serde::{Deserialize, Serialize};

use super::{invalid, RunError, RunState};
use crate::result::RunResult;
use crate::space::SearchSpace;
use crate::trace::EventTrace;

pub const NAME: &str = "ucb-e";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UcbEParams {
    /// Total sub-train budget T.
    pub budget: u64,
    /// Exploration parameter E scaling the bonus `sqrt(E / pulls)`.
    pub exploration: f64,
    /// Number of models sampled up front (K).
    pub initial_arms: u32,
}

impl UcbEParams {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.initial_arms < 1 {
            return Err(invalid("initial_arms must be at least 1"));
        }
        if !self.exploration.is_finite() || self.exploration < 0.0 {
            return Err(invalid("exploration must be finite and non-negative"));
        }
        if self.budget < u64::from(self.initial_arms) {
            return Err(invalid(format!(
                "budget {} cannot initialize {} arms (T >= K required)",
                self.budget, self.initial_arms
            )));
        }
        Ok(())
    }
}

pub fn run<S: SearchSpace>(
    space: &S,
    params: &UcbEParams,
    seed: u64,
) -> Result<(RunResult, EventTrace), RunError> {
    params.validate()?;
    let mut state = RunState::new(space, NAME, seed, params.budget, params);

    for _ in 0..params.initial_arms {
        let config = state.sample_config();
        state.init_new_arm(config)?;
    }

    for round in u64::from(params.initial_arms) + 1..=params.budget {
        let arm = state.select_ucb(params.exploration, round);
        state.train_arm(arm)?;
    }

    let winner = state.select_final();
    Ok(state.finish(winner))
}
