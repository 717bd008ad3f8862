//! Random search: sample `T / N` fresh models and train each fully.

use serde::{Deserialize, Serialize};

use super::{invalid, RunError, RunState};
use crate::result::RunResult;
use crate::space::SearchSpace;
use crate::trace::EventTrace;

pub const NAME: &str = "rs";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSearchParams {
    /// Total sub-train budget T.
    pub budget: u64,
    /// Sub-trains per model (N).
    pub train_cap: u32,
}

impl RandomSearchParams {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.train_cap < 1 {
            return Err(invalid("train_cap must be at least 1"));
        }
        if self.budget < u64::from(self.train_cap) {
            return Err(invalid(format!(
                "budget {} cannot fully train a single model of {} sub-trains",
                self.budget, self.train_cap
            )));
        }
        Ok(())
    }

    /// Number of models tested: ⌊T / N⌋. When N does not divide T the
    /// remainder stays unspent.
    pub fn models(&self) -> u64 {
        self.budget / u64::from(self.train_cap)
    }
}

pub fn run<S: SearchSpace>(
    space: &S,
    params: &RandomSearchParams,
    seed: u64,
) -> Result<(RunResult, EventTrace), RunError> {
    params.validate()?;
    let mut state = RunState::new(space, NAME, seed, params.budget, params);

    for _ in 0..params.models() {
        let config = state.sample_config();
        let id = state.init_new_arm(config)?;
        for _ in 1..params.train_cap {
            state.train_arm(id)?;
        }
    }

    let winner = state.select_final();
    Ok(state.finish(winner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::vector::{VectorLandscape, VectorLandscapeSpec};

    fn space() -> VectorLandscape {
        VectorLandscape::new(VectorLandscapeSpec {
            dims: 4,
            alphabet: 3,
            optimum: None,
            a_max: 0.9,
            a_min: 0.1,
            slope: 0.1,
            curve_rate: 0.5,
            noise_sd: 0.0,
            overfit: None,
            seed: 5,
        })
        .unwrap()
    }

    #[test]
    fn single_model_budget() {
        let params = RandomSearchParams {
            budget: 10,
            train_cap: 10,
        };
        let (result, _) = run(&space(), &params, 0).unwrap();
        assert_eq!(result.tested_models, 1);
        assert_eq!(result.consumed, 10);
        assert_eq!(result.selected_trains, 10);
    }

    #[test]
    fn remainder_stays_unspent() {
        let params = RandomSearchParams {
            budget: 25,
            train_cap: 10,
        };
        let (result, _) = run(&space(), &params, 1).unwrap();
        assert_eq!(result.tested_models, 2);
        assert_eq!(result.consumed, 20);
        assert_eq!(result.unspent(), 5);
    }

    #[test]
    fn winner_has_best_mean() {
        let params = RandomSearchParams {
            budget: 60,
            train_cap: 10,
        };
        let (result, _) = run(&space(), &params, 2).unwrap();
        let best = result
            .arms
            .iter()
            .map(|a| a.mean)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(result.selected_mean, best);
    }

    #[test]
    fn budget_below_one_model_rejected() {
        let params = RandomSearchParams {
            budget: 5,
            train_cap: 10,
        };
        assert!(matches!(
            run(&space(), &params, 0),
            Err(RunError::InvalidParams(_))
        ));
    }
}
