//! Steady-state evolutionary search with replace-worst survival.
//!
//! An initial population of `K_ea` random models is fully trained (`N`
//! sub-trains each). The loop then generates `T/N - K_ea` offspring one at a
//! time: two distinct parents are drawn uniformly from the population, the
//! offspring is their crossover (or a copy of the first parent when the
//! space has no crossover) passed through the mutation operator, and it is
//! fully trained. If its mean beats the population's current worst, it takes
//! that slot; otherwise it is discarded from the population (the arm record
//! stays, so it still counts as a tested model).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{invalid, RunError, RunState};
use crate::arm::ArmId;
use crate::result::RunResult;
use crate::space::SearchSpace;
use crate::trace::EventTrace;

pub const NAME: &str = "ea";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EaParams {
    /// Population size (K_ea). Must be well below T/N to leave room for
    /// offspring.
    pub population: u32,
    /// Sub-trains per individual (N).
    pub train_cap: u32,
    /// Total sub-train budget T.
    pub budget: u64,
}

impl EaParams {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.population < 1 {
            return Err(invalid("population must be at least 1"));
        }
        if self.train_cap < 1 {
            return Err(invalid("train_cap must be at least 1"));
        }
        let total = self.budget / u64::from(self.train_cap);
        if u64::from(self.population) > total {
            return Err(invalid(format!(
                "population {} exceeds the {} fully trainable models (K_ea <= T/N required)",
                self.population, total
            )));
        }
        Ok(())
    }

    /// Offspring generated: ⌊T/N⌋ - K_ea.
    pub fn offspring(&self) -> u64 {
        self.budget / u64::from(self.train_cap) - u64::from(self.population)
    }
}

pub fn run<S: SearchSpace>(
    space: &S,
    params: &EaParams,
    seed: u64,
) -> Result<(RunResult, EventTrace), RunError> {
    params.validate()?;
    let mut state = RunState::new(space, NAME, seed, params.budget, params);

    let mut population = Vec::with_capacity(params.population as usize);
    for _ in 0..params.population {
        let config = state.sample_config();
        population.push(train_full(&mut state, params.train_cap, config)?);
    }

    for _ in 0..params.offspring() {
        let (first, second) = pick_distinct_parents(&mut state, &population);
        let base = if space.supports_crossover() {
            let (a, b) = (
                state.arm(first).config().clone(),
                state.arm(second).config().clone(),
            );
            state.crossover_configs(&a, &b)?
        } else {
            state.arm(first).config().clone()
        };
        let child_config = state.mutate_config(&base)?;
        let child = train_full(&mut state, params.train_cap, child_config)?;

        let worst_slot = (0..population.len())
            .min_by(|&a, &b| {
                let ma = state.arm(population[a]).mean();
                let mb = state.arm(population[b]).mean();
                ma.partial_cmp(&mb).expect("means are never NaN")
            })
            .expect("population is non-empty");
        if state.arm(child).mean() > state.arm(population[worst_slot]).mean() {
            population[worst_slot] = child;
        }
    }

    let winner = state.select_final_among(&population);
    Ok(state.finish(winner))
}

fn train_full<S: SearchSpace>(
    state: &mut RunState<'_, S>,
    cap: u32,
    config: S::Config,
) -> Result<ArmId, RunError> {
    let id = state.init_new_arm(config)?;
    for _ in 1..cap {
        state.train_arm(id)?;
    }
    Ok(id)
}

/// Two distinct population members, uniformly at random from the parents
/// stream (two draws). A population of one breeds with itself, drawing
/// nothing.
fn pick_distinct_parents<S: SearchSpace>(
    state: &mut RunState<S>,
    population: &[ArmId],
) -> (ArmId, ArmId) {
    if population.len() == 1 {
        return (population[0], population[0]);
    }
    let rng = state.parents_rng();
    let first = rng.random_range(0..population.len());
    let mut second = rng.random_range(0..population.len() - 1);
    if second >= first {
        second += 1;
    }
    (population[first], population[second])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::tabular::{TabularArmSpec, TabularLandscape, TabularLandscapeSpec};
    use crate::landscapes::vector::{VectorLandscape, VectorLandscapeSpec};
    use crate::trace::Event;

    fn vector_space() -> VectorLandscape {
        VectorLandscape::new(VectorLandscapeSpec {
            dims: 6,
            alphabet: 3,
            optimum: None,
            a_max: 0.9,
            a_min: 0.1,
            slope: 0.05,
            curve_rate: 0.5,
            noise_sd: 0.01,
            overfit: None,
            seed: 2,
        })
        .unwrap()
    }

    #[test]
    fn offspring_and_model_counts() {
        let params = EaParams {
            population: 5,
            train_cap: 10,
            budget: 200,
        };
        let (result, _) = run(&vector_space(), &params, 0).unwrap();
        assert_eq!(params.offspring(), 15);
        assert_eq!(result.tested_models, 20);
        assert_eq!(result.consumed, 200);
        for arm in &result.arms {
            assert_eq!(arm.trains, 10);
            assert_eq!(arm.pulls, arm.trains);
        }
    }

    #[test]
    fn population_equal_to_pool_reduces_to_random_search() {
        let params = EaParams {
            population: 4,
            train_cap: 5,
            budget: 20,
        };
        let (result, trace) = run(&vector_space(), &params, 3).unwrap();
        assert_eq!(params.offspring(), 0);
        assert_eq!(result.tested_models, 4);
        assert_eq!(result.consumed, 20);
        assert!(!trace.events.iter().any(|e| e.kind() == "mutate"));
    }

    #[test]
    fn oversized_population_rejected() {
        let params = EaParams {
            population: 5,
            train_cap: 10,
            budget: 40,
        };
        assert!(matches!(
            run(&vector_space(), &params, 0),
            Err(RunError::InvalidParams(_))
        ));
    }

    #[test]
    fn replace_worst_on_strict_improvement() {
        // Tabular space without crossover: offspring = mutate(parent).
        // Config 0 is bad (0.3) and its only neighbor is excellent (0.9),
        // so the first offspring must displace the worst member.
        let space = TabularLandscape::new(TabularLandscapeSpec {
            n_max: 4,
            deterministic: true,
            noise_sd: 0.0,
            arms: vec![
                TabularArmSpec {
                    config_id: 0,
                    curve: vec![0.3; 4],
                    neighbors: vec![1],
                    asymptote: 0.3,
                },
                TabularArmSpec {
                    config_id: 1,
                    curve: vec![0.9; 4],
                    neighbors: vec![0],
                    asymptote: 0.9,
                },
            ],
        })
        .unwrap();
        let params = EaParams {
            population: 2,
            train_cap: 2,
            budget: 12,
        };
        let (result, trace) = run(&space, &params, 1).unwrap();
        assert_eq!(result.selected_mean, 0.9);
        // Offspring are recorded as fresh arms, not mutate events.
        assert!(!trace.events.iter().any(|e| matches!(e, Event::Mutate { .. })));
        assert_eq!(result.tested_models, 6);
    }
}
