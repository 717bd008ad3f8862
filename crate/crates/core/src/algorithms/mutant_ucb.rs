//! Optimistic selection with an evolutionary mutation operator.
//!
//! Starts like plain optimistic exploration: `K` models, one sub-train each.
//! At every round `t = K+1 .. T-N+1` the arm maximizing
//! `mean + sqrt(E / pulls)` is picked, then a Bernoulli draw with train
//! probability `p = 1 - trains/N` (or the exponential variant) decides what
//! happens: with `X = 1` the model gets one more sub-train; with `X = 0` a
//! mutant of the *trained* model joins the pool as a new arm and receives
//! its first sub-train, and only the parent's pull count moves. A model that
//! has reached the cap `N` always mutates, so no arm ever trains past `N`.
//!
//! After the loop the best arm by empirical mean is selected and its
//! training topped up to exactly `N` sub-trains, so the run consumes
//! `T + 1 - trains_winner` sub-trains, between `T-N+1` and `T`.

use serde::{Deserialize, Serialize};

use super::{invalid, RunError, RunState};
use crate::policy::{mutation_probability, Schedule};
use crate::result::RunResult;
use crate::rng::{streams, RngStream, StreamRng};
use crate::space::SearchSpace;
use crate::trace::EventTrace;

pub const NAME: &str = "mutant-ucb";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutantUcbParams {
    /// Total sub-train budget T.
    pub budget: u64,
    /// Exploration parameter E.
    pub exploration: f64,
    /// Initial number of models (K).
    pub initial_arms: u32,
    /// Per-model sub-train cap (N).
    pub train_cap: u32,
    /// Decay of the train probability in the model's train count.
    #[serde(default)]
    pub schedule: Schedule,
    /// Warm-start fraction β: a mutant inherits ⌊β · parent_progress⌋
    /// epochs of training. 0 (the default) starts mutants from scratch.
    #[serde(default)]
    pub warm_start: f64,
}

impl MutantUcbParams {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.initial_arms < 1 {
            return Err(invalid("initial_arms must be at least 1"));
        }
        if self.train_cap < 1 {
            return Err(invalid("train_cap must be at least 1"));
        }
        if !self.exploration.is_finite() || self.exploration < 0.0 {
            return Err(invalid("exploration must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&self.warm_start) {
            return Err(invalid("warm_start must lie in [0, 1]"));
        }
        if self.budget < u64::from(self.initial_arms) + u64::from(self.train_cap) {
            return Err(invalid(format!(
                "budget {} is below initial_arms + train_cap = {} (T >= K + N required \
                 to initialize every arm and finalize the winner)",
                self.budget,
                u64::from(self.initial_arms) + u64::from(self.train_cap)
            )));
        }
        Ok(())
    }
}

/// Source of the train-or-mutate coin flips, injectable so tests can force
/// or script the decision sequence.
pub trait BernoulliSource {
    /// Draw once with train probability `p`.
    fn draw(&mut self, p: f64) -> bool;
}

/// The production source: `X = (u < p)` with `u` uniform on `[0, 1)` from
/// the run's dedicated Bernoulli substream. One draw per round, also when
/// `p` is 0 or 1.
pub struct SeededBernoulli(StreamRng);

impl SeededBernoulli {
    pub fn new(rng: StreamRng) -> Self {
        Self(rng)
    }

    pub fn for_seed(seed: u64) -> Self {
        Self(RngStream::new(seed).substream(streams::BERNOULLI))
    }
}

impl BernoulliSource for SeededBernoulli {
    fn draw(&mut self, p: f64) -> bool {
        use rand::Rng;
        self.0.random::<f64>() < p
    }
}

/// Replays a fixed bit sequence regardless of `p`. Panics when the script
/// runs out.
pub struct ScriptedBits {
    bits: Vec<bool>,
    pos: usize,
}

impl ScriptedBits {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits, pos: 0 }
    }
}

impl BernoulliSource for ScriptedBits {
    fn draw(&mut self, _p: f64) -> bool {
        let bit = *self
            .bits
            .get(self.pos)
            .expect("scripted Bernoulli bits exhausted");
        self.pos += 1;
        bit
    }
}

/// Mutation disabled: every draw trains. The per-model cap no longer binds,
/// which reduces the loop to plain optimistic exploration.
pub struct AlwaysTrain;

impl BernoulliSource for AlwaysTrain {
    fn draw(&mut self, _p: f64) -> bool {
        true
    }
}

pub fn run<S: SearchSpace>(
    space: &S,
    params: &MutantUcbParams,
    seed: u64,
) -> Result<(RunResult, EventTrace), RunError> {
    run_with(space, params, seed, &mut SeededBernoulli::for_seed(seed))
}

/// Run with an explicit Bernoulli source.
pub fn run_with<S: SearchSpace>(
    space: &S,
    params: &MutantUcbParams,
    seed: u64,
    bernoulli: &mut dyn BernoulliSource,
) -> Result<(RunResult, EventTrace), RunError> {
    params.validate()?;
    let mut state = RunState::new(space, NAME, seed, params.budget, params);
    let cap = params.train_cap;

    for _ in 0..params.initial_arms {
        let config = state.sample_config();
        state.init_new_arm(config)?;
    }

    let last_round = params.budget - u64::from(cap) + 1;
    for round in u64::from(params.initial_arms) + 1..=last_round {
        let arm = state.select_ucb(params.exploration, round);
        let trains = state.arm(arm).trains();
        // trains can exceed the cap only under a source that ignores p
        // (mutation disabled); the probability is unused in that case.
        let p = if trains <= cap {
            mutation_probability(trains, cap, params.schedule)
        } else {
            0.0
        };
        if bernoulli.draw(p) {
            state.train_arm(arm)?;
        } else {
            state.spawn_mutant(arm, params.warm_start)?;
        }
    }

    let winner = state.select_final();
    while state.arm(winner).trains() < cap {
        state.finalize_arm(winner)?;
    }
    Ok(state.finish(winner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::vector::{VectorLandscape, VectorLandscapeSpec};
    use crate::trace::Event;

    fn noisy_space() -> VectorLandscape {
        VectorLandscape::new(VectorLandscapeSpec {
            dims: 6,
            alphabet: 3,
            optimum: None,
            a_max: 0.9,
            a_min: 0.1,
            slope: 0.05,
            curve_rate: 0.5,
            noise_sd: 0.02,
            overfit: None,
            seed: 99,
        })
        .unwrap()
    }

    #[test]
    fn budget_identity_holds_for_any_seed() {
        let space = noisy_space();
        let params = MutantUcbParams {
            budget: 80,
            exploration: 0.05,
            initial_arms: 5,
            train_cap: 8,
            schedule: Schedule::Linear,
            warm_start: 0.0,
        };
        for seed in 0..25 {
            let (result, trace) = run(&space, &params, seed).unwrap();
            let winner_trains_at_selection = {
                // trains of the winner when select_final fired = final
                // trains minus the finalize top-ups.
                let finalizes = trace
                    .events
                    .iter()
                    .filter(|e| e.kind() == "finalize_train")
                    .count() as u32;
                result.selected_trains - finalizes
            };
            assert_eq!(
                result.consumed,
                params.budget + 1 - u64::from(winner_trains_at_selection),
                "seed {seed}"
            );
            assert!(result.consumed >= params.budget - u64::from(params.train_cap) + 1);
            assert!(result.consumed <= params.budget);
            assert_eq!(result.selected_trains, params.train_cap);
        }
    }

    #[test]
    fn cap_and_mutant_bookkeeping() {
        let space = noisy_space();
        let params = MutantUcbParams {
            budget: 100,
            exploration: 0.05,
            initial_arms: 6,
            train_cap: 10,
            schedule: Schedule::Linear,
            warm_start: 0.0,
        };
        for seed in 0..10 {
            let (result, trace) = run(&space, &params, seed).unwrap();
            let mut children = vec![0u32; result.arms.len()];
            for event in &trace.events {
                if let Event::Mutate { parent, .. } = event {
                    children[parent.index()] += 1;
                }
            }
            for arm in &result.arms {
                assert!(arm.trains <= params.train_cap, "seed {seed}");
                assert!(arm.pulls >= arm.trains);
                assert_eq!(arm.pulls - arm.trains, children[arm.id.index()], "seed {seed}");
            }
        }
    }

    #[test]
    fn single_arm_unit_cap_always_mutates() {
        // K = 1, N = 1: p = 1 - 1/1 = 0, so every loop round spawns a
        // mutant; the arm count is 1 + (T - N + 1 - K), counted from the
        // trace.
        let space = noisy_space();
        let params = MutantUcbParams {
            budget: 30,
            exploration: 0.05,
            initial_arms: 1,
            train_cap: 1,
            schedule: Schedule::Linear,
            warm_start: 0.0,
        };
        let (result, trace) = run(&space, &params, 7).unwrap();
        let mutations = trace.events.iter().filter(|e| e.kind() == "mutate").count() as u64;
        let rounds = params.budget - u64::from(params.train_cap) + 1 - u64::from(params.initial_arms);
        assert_eq!(mutations, rounds);
        assert_eq!(result.tested_models, 1 + rounds);
        assert!(!trace.events.iter().any(|e| e.kind() == "sub_train"));
        // Winner already has one train = cap, so nothing to finalize.
        assert_eq!(result.consumed, params.budget);
    }

    #[test]
    fn disabled_mutation_reduces_to_ucb_e() {
        let space = noisy_space();
        let params = MutantUcbParams {
            budget: 60,
            exploration: 0.05,
            initial_arms: 4,
            train_cap: 6,
            schedule: Schedule::Linear,
            warm_start: 0.0,
        };
        let ucb_params = super::super::ucb_e::UcbEParams {
            budget: params.budget,
            exploration: params.exploration,
            initial_arms: params.initial_arms,
        };
        for seed in 0..5 {
            let (_, mutant_trace) =
                run_with(&space, &params, seed, &mut AlwaysTrain).unwrap();
            let (_, ucbe_trace) = super::super::ucb_e::run(&space, &ucb_params, seed).unwrap();
            let selects = |t: &EventTrace| {
                t.events
                    .iter()
                    .filter(|e| e.kind() == "select")
                    .cloned()
                    .collect::<Vec<_>>()
            };
            let mutant_selects = selects(&mutant_trace);
            let ucbe_selects = selects(&ucbe_trace);
            assert_eq!(
                mutant_selects.as_slice(),
                &ucbe_selects[..mutant_selects.len()],
                "seed {seed}"
            );
        }
    }

    #[test]
    fn warm_start_offsets_mutant_epochs() {
        let space = noisy_space();
        let params = MutantUcbParams {
            budget: 60,
            exploration: 0.05,
            initial_arms: 2,
            train_cap: 6,
            schedule: Schedule::Linear,
            warm_start: 1.0,
        };
        // With β = 1 a mutant of a model trained e epochs starts at epoch e.
        // The run must complete and respect the usual invariants; epoch
        // bookkeeping (trains) still starts at 1 for the mutant.
        let (result, trace) = run(&space, &params, 21).unwrap();
        assert!(trace.validate().is_ok());
        assert_eq!(result.selected_trains, params.train_cap);
    }

    #[test]
    fn rejects_budget_below_k_plus_n() {
        let space = noisy_space();
        let params = MutantUcbParams {
            budget: 10,
            exploration: 0.05,
            initial_arms: 6,
            train_cap: 5,
            schedule: Schedule::Linear,
            warm_start: 0.0,
        };
        match run(&space, &params, 0) {
            Err(RunError::InvalidParams(msg)) => assert!(msg.contains("T >= K + N")),
            other => panic!("expected InvalidParams, got {other:?}"),
        }
    }
}
