//! The six selection strategies.
//!
//! Every strategy consumes a [`SearchSpace`] and a seed, spends its budget
//! through a [`BudgetLedger`], and emits a ([`RunResult`], [`EventTrace`])
//! pair. Runs are strictly sequential and deterministic given their seed;
//! the harness parallelizes across runs, never inside one.

use serde::Serialize;
use thiserror::Error;

use crate::arm::{ArmId, ArmRecord, TrainOutcome};
use crate::budget::{BudgetExhausted, BudgetLedger};
use crate::policy::{argmax_arm, ucb_index};
use crate::result::{ArmSummary, IncumbentPoint, RunResult};
use crate::rng::{streams, RngStream, StreamRng};
use crate::space::{SearchSpace, SpaceError};
use crate::trace::{Event, EventTrace, TraceHeader, TRACE_SCHEMA_VERSION};

pub mod ea;
pub mod hyperband;
pub mod mutant_ucb;
pub mod random_search;
pub mod successive_halving;
pub mod ucb_e;

pub use ea::EaParams;
pub use hyperband::HyperbandParams;
pub use mutant_ucb::{AlwaysTrain, BernoulliSource, MutantUcbParams, ScriptedBits, SeededBernoulli};
pub use random_search::RandomSearchParams;
pub use successive_halving::SuccessiveHalvingParams;
pub use ucb_e::UcbEParams;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Budget(#[from] BudgetExhausted),
}

pub(crate) fn invalid(msg: impl Into<String>) -> RunError {
    RunError::InvalidParams(msg.into())
}

/// Book-keeping shared by all strategies: the arm table, the ledger, the
/// event log, the incumbent staircase and the named RNG substreams.
pub(crate) struct RunState<'s, S: SearchSpace> {
    space: &'s S,
    algorithm: &'static str,
    seed: u64,
    params: serde_json::Value,
    ledger: BudgetLedger,
    arms: Vec<ArmRecord<S::Config>>,
    events: Vec<Event>,
    incumbent: Vec<IncumbentPoint>,
    best_seen: f64,
    rng_sample: StreamRng,
    rng_mutate: StreamRng,
    rng_train: StreamRng,
    rng_tie: StreamRng,
    rng_parents: StreamRng,
}

impl<'s, S: SearchSpace> RunState<'s, S> {
    pub fn new(
        space: &'s S,
        algorithm: &'static str,
        seed: u64,
        budget: u64,
        params: &impl Serialize,
    ) -> Self {
        let root = RngStream::new(seed);
        Self {
            space,
            algorithm,
            seed,
            params: serde_json::to_value(params).expect("params serialize"),
            ledger: BudgetLedger::new(budget),
            arms: Vec::new(),
            events: Vec::new(),
            incumbent: Vec::new(),
            best_seen: f64::NEG_INFINITY,
            rng_sample: root.substream(streams::SAMPLE),
            rng_mutate: root.substream(streams::MUTATE),
            rng_train: root.substream(streams::TRAIN),
            rng_tie: root.substream(streams::TIE),
            rng_parents: root.substream(streams::PARENTS),
        }
    }

    pub fn remaining(&self) -> u64 {
        self.ledger.remaining()
    }

    pub fn arm(&self, id: ArmId) -> &ArmRecord<S::Config> {
        &self.arms[id.index()]
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    pub fn parents_rng(&mut self) -> &mut StreamRng {
        &mut self.rng_parents
    }

    pub fn sample_config(&mut self) -> S::Config {
        self.space.sample(&mut self.rng_sample)
    }

    /// Variation operators draw from the mutation stream.
    pub fn mutate_config(&mut self, base: &S::Config) -> Result<S::Config, RunError> {
        Ok(self.space.mutate(base, 0, &mut self.rng_mutate)?)
    }

    pub fn crossover_configs(
        &mut self,
        a: &S::Config,
        b: &S::Config,
    ) -> Result<S::Config, RunError> {
        Ok(self.space.crossover(a, b, &mut self.rng_mutate)?)
    }

    fn bump_incumbent(&mut self, id: ArmId) {
        let mean = self.arms[id.index()].mean();
        if mean > self.best_seen {
            self.best_seen = mean;
            self.incumbent.push(IncumbentPoint {
                consumed: self.ledger.consumed(),
                best_mean: mean,
            });
        }
    }

    /// Create a fresh arm and give it its first sub-train.
    pub fn init_new_arm(&mut self, config: S::Config) -> Result<ArmId, RunError> {
        self.ledger.consume()?;
        let reward = self.space.sub_train(&config, 0, &mut self.rng_train)?;
        let id = ArmId(self.arms.len());
        self.events.push(Event::InitTrain {
            arm: id,
            reward,
            config: serde_json::to_value(&config).expect("config serializes"),
        });
        self.arms
            .push(ArmRecord::initialized(id, config, None, reward, 0));
        self.bump_incumbent(id);
        Ok(id)
    }

    /// Restart an existing arm's model from scratch with a fresh first
    /// sub-train (round-based strategies re-train survivors this way).
    pub fn reinit_arm(&mut self, id: ArmId) -> Result<(), RunError> {
        self.ledger.consume()?;
        let record = &self.arms[id.index()];
        let reward = self.space.sub_train(record.config(), 0, &mut self.rng_train)?;
        self.events.push(Event::InitTrain {
            arm: id,
            reward,
            config: serde_json::to_value(record.config()).expect("config serializes"),
        });
        self.arms[id.index()].reset_instance(reward);
        self.bump_incumbent(id);
        Ok(())
    }

    fn train_inner(&mut self, id: ArmId) -> Result<TrainOutcome, RunError> {
        self.ledger.consume()?;
        let record = &self.arms[id.index()];
        let reward = self
            .space
            .sub_train(record.config(), record.train_progress(), &mut self.rng_train)?;
        let outcome = self.arms[id.index()].record_train(reward);
        Ok(outcome)
    }

    /// One more sub-train on an existing arm.
    pub fn train_arm(&mut self, id: ArmId) -> Result<TrainOutcome, RunError> {
        let outcome = self.train_inner(id)?;
        self.events.push(Event::SubTrain {
            arm: id,
            reward: outcome.reward,
            epoch: outcome.epoch,
        });
        self.bump_incumbent(id);
        Ok(outcome)
    }

    /// Top-up sub-train on the already-selected winner.
    pub fn finalize_arm(&mut self, id: ArmId) -> Result<TrainOutcome, RunError> {
        let outcome = self.train_inner(id)?;
        self.events.push(Event::FinalizeTrain {
            arm: id,
            reward: outcome.reward,
            epoch: outcome.epoch,
        });
        self.bump_incumbent(id);
        Ok(outcome)
    }

    /// Spawn a mutant of `parent` (mutation applies to the trained model)
    /// and give it its first sub-train. The parent is charged one pull; its
    /// mean and train count stay untouched. With `warm_start` β > 0 the
    /// mutant inherits ⌊β · parent_progress⌋ epochs of training.
    pub fn spawn_mutant(&mut self, parent: ArmId, warm_start: f64) -> Result<ArmId, RunError> {
        let parent_record = &self.arms[parent.index()];
        let parent_progress = parent_record.train_progress();
        let config = self.space.mutate(
            parent_record.config(),
            parent_progress,
            &mut self.rng_mutate,
        )?;
        let inherited = (warm_start * f64::from(parent_progress)).floor() as u32;
        self.ledger.consume()?;
        let reward = self.space.sub_train(&config, inherited, &mut self.rng_train)?;
        let child = ArmId(self.arms.len());
        self.events.push(Event::Mutate {
            parent,
            child,
            child_reward: reward,
            config: serde_json::to_value(&config).expect("config serializes"),
        });
        self.arms[parent.index()].record_mutant_spawned();
        self.arms
            .push(ArmRecord::initialized(child, config, Some(parent), reward, inherited));
        self.bump_incumbent(child);
        Ok(child)
    }

    /// Optimistic choice over all current arms, recorded as a `select`
    /// event with the winning index value.
    pub fn select_ucb(&mut self, exploration: f64, round: u64) -> ArmId {
        let scores: Vec<(ArmId, f64)> = self
            .arms
            .iter()
            .map(|a| (a.id(), ucb_index(a.mean(), a.pulls(), exploration)))
            .collect();
        let winner = argmax_arm(&scores, &mut self.rng_tie);
        let index = scores[winner.index()].1;
        self.events.push(Event::Select {
            round,
            arm: winner,
            index,
        });
        winner
    }

    /// Final selection by empirical mean over the given candidates.
    pub fn select_final_among(&mut self, candidates: &[ArmId]) -> ArmId {
        let scores: Vec<(ArmId, f64)> = candidates
            .iter()
            .map(|&id| (id, self.arms[id.index()].mean()))
            .collect();
        let winner = argmax_arm(&scores, &mut self.rng_tie);
        self.events.push(Event::SelectFinal { arm: winner });
        winner
    }

    /// Final selection by empirical mean over all arms.
    pub fn select_final(&mut self) -> ArmId {
        let all: Vec<ArmId> = self.arms.iter().map(|a| a.id()).collect();
        self.select_final_among(&all)
    }

    /// The `k` candidates with the highest means, ties to the lower id.
    pub fn top_by_mean(&self, candidates: &[ArmId], k: usize) -> Vec<ArmId> {
        let mut ranked: Vec<ArmId> = candidates.to_vec();
        ranked.sort_by(|&a, &b| {
            let ma = self.arms[a.index()].mean();
            let mb = self.arms[b.index()].mean();
            mb.partial_cmp(&ma)
                .expect("means are never NaN")
                .then_with(|| a.cmp(&b))
        });
        ranked.truncate(k);
        ranked
    }

    pub fn finish(self, selected: ArmId) -> (RunResult, EventTrace) {
        let winner = &self.arms[selected.index()];
        let result = RunResult {
            algorithm: self.algorithm.to_string(),
            seed: self.seed,
            selected,
            selected_config: serde_json::to_value(winner.config()).expect("config serializes"),
            selected_mean: winner.mean(),
            selected_trains: winner.trains(),
            tested_models: self.arms.len() as u64,
            consumed: self.ledger.consumed(),
            budget: self.ledger.limit(),
            incumbent: self.incumbent,
            arms: self
                .arms
                .iter()
                .map(|a| ArmSummary {
                    id: a.id(),
                    mean: a.mean(),
                    pulls: a.pulls(),
                    trains: a.trains(),
                    parent: a.parent(),
                })
                .collect(),
        };
        let trace = EventTrace {
            header: TraceHeader {
                schema: TRACE_SCHEMA_VERSION,
                algorithm: self.algorithm.to_string(),
                seed: self.seed,
                params: self.params,
                space: self.space.descriptor(),
                budget: self.ledger.limit(),
                consumed: self.ledger.consumed(),
            },
            events: self.events,
        };
        (result, trace)
    }
}
