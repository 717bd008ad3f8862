//! Successive halving: split the budget evenly across elimination rounds.
//!
//! Round `r` re-trains the surviving `⌊n / ηʳ⌋` arms from scratch with
//! `⌊B / (|arms_r| · rounds)⌋` sub-trains each, then keeps the top `1/η`
//! fraction by empirical mean, until a single arm remains.

use serde::{Deserialize, Serialize};

use super::{invalid, RunError, RunState};
use crate::result::RunResult;
use crate::space::SearchSpace;
use crate::trace::EventTrace;

pub const NAME: &str = "sh";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuccessiveHalvingParams {
    /// Total sub-train budget B.
    pub budget: u64,
    /// Number of configurations sampled up front (n).
    pub initial_arms: u32,
    /// Halving rate η ≥ 2.
    pub eta: u32,
}

/// Smallest `r` with `eta^r >= n`, in exact integer arithmetic.
pub(crate) fn ceil_log(eta: u64, n: u64) -> u32 {
    assert!(eta >= 2);
    let mut rounds = 0;
    let mut reach = 1u64;
    while reach < n {
        reach = reach.saturating_mul(eta);
        rounds += 1;
    }
    rounds
}

impl SuccessiveHalvingParams {
    /// Number of elimination rounds; a single arm still gets one round.
    pub fn rounds(&self) -> u32 {
        ceil_log(u64::from(self.eta), u64::from(self.initial_arms)).max(1)
    }

    /// Arms entering round `r` and their per-arm resource.
    pub fn round_plan(&self, r: u32) -> (u64, u64) {
        let arms = (u64::from(self.initial_arms) / u64::from(self.eta).pow(r)).max(1);
        let resource = self.budget / (arms * u64::from(self.rounds()));
        (arms, resource)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.initial_arms < 1 {
            return Err(invalid("initial_arms must be at least 1"));
        }
        if self.eta < 2 {
            return Err(invalid("eta must be at least 2"));
        }
        let (_, resource) = self.round_plan(0);
        if resource < 1 {
            return Err(invalid(format!(
                "budget {} is too small for one sub-train per arm in round 0 \
                 ({} arms over {} rounds)",
                self.budget,
                self.initial_arms,
                self.rounds()
            )));
        }
        Ok(())
    }
}

pub fn run<S: SearchSpace>(
    space: &S,
    params: &SuccessiveHalvingParams,
    seed: u64,
) -> Result<(RunResult, EventTrace), RunError> {
    params.validate()?;
    let mut state = RunState::new(space, NAME, seed, params.budget, params);

    let mut active = Vec::new();
    for r in 0..params.rounds() {
        let (arm_count, resource) = params.round_plan(r);
        if r == 0 {
            for _ in 0..arm_count {
                let config = state.sample_config();
                let id = state.init_new_arm(config)?;
                for _ in 1..resource {
                    state.train_arm(id)?;
                }
                active.push(id);
            }
        } else {
            active = state.top_by_mean(&active, arm_count as usize);
            for &id in &active {
                state.reinit_arm(id)?;
                for _ in 1..resource {
                    state.train_arm(id)?;
                }
            }
        }
    }

    let survivor = state.top_by_mean(&active, 1)[0];
    let winner = state.select_final_among(&[survivor]);
    Ok(state.finish(winner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::tabular::{TabularArmSpec, TabularLandscape, TabularLandscapeSpec};

    fn ladder_space() -> TabularLandscape {
        // Four deterministic arms with flat curves 0.1, 0.2, 0.3, 0.4.
        let arms = (0..4)
            .map(|i| TabularArmSpec {
                config_id: i,
                curve: vec![0.1 * f64::from(i + 1); 32],
                neighbors: vec![(i + 1) % 4],
                asymptote: 0.1 * f64::from(i + 1),
            })
            .collect();
        TabularLandscape::new(TabularLandscapeSpec {
            n_max: 32,
            deterministic: true,
            noise_sd: 0.0,
            arms,
        })
        .unwrap()
    }

    #[test]
    fn ceil_log_exact() {
        assert_eq!(ceil_log(3, 9), 2);
        assert_eq!(ceil_log(3, 10), 3);
        assert_eq!(ceil_log(2, 4), 2);
        assert_eq!(ceil_log(2, 1), 0);
        assert_eq!(ceil_log(3, 1), 0);
    }

    #[test]
    fn single_arm_gets_whole_budget() {
        let params = SuccessiveHalvingParams {
            budget: 12,
            initial_arms: 1,
            eta: 3,
        };
        let (result, _) = run(&ladder_space(), &params, 0).unwrap();
        assert_eq!(result.tested_models, 1);
        assert_eq!(result.consumed, 12);
        assert_eq!(result.selected_trains, 12);
    }

    #[test]
    fn deterministic_ladder_keeps_best() {
        let params = SuccessiveHalvingParams {
            budget: 24,
            initial_arms: 4,
            eta: 2,
        };
        // The survivor must carry the best mean among the sampled pool
        // (the pool may contain duplicates: sampling is with replacement).
        let (result, _) = run(&ladder_space(), &params, 3).unwrap();
        let best = result
            .arms
            .iter()
            .map(|a| a.mean)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(result.selected_mean, best);
    }

    #[test]
    fn too_small_budget_rejected() {
        let params = SuccessiveHalvingParams {
            budget: 5,
            initial_arms: 4,
            eta: 2,
        };
        assert!(matches!(
            run(&ladder_space(), &params, 0),
            Err(RunError::InvalidParams(_))
        ));
    }

    #[test]
    fn budget_split_never_overspends() {
        for n in [2u32, 3, 5, 9, 16] {
            for budget in [40u64, 100, 321] {
                let params = SuccessiveHalvingParams {
                    budget,
                    initial_arms: n,
                    eta: 2,
                };
                if params.validate().is_err() {
                    continue;
                }
                let (result, _) = run(&ladder_space(), &params, 1).unwrap();
                assert!(result.consumed <= budget);
            }
        }
    }
}
