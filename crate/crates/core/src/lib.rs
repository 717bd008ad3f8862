//! Fixed-budget best-arm identification for model selection.
//!
//! A run hands a budget of `T` sub-trains (one sub-train = one unit of
//! training, rewarded with a validation accuracy in `[0, 1]`) to a selection
//! strategy, which decides round by round which candidate model to train
//! next. Six strategies are provided:
//!
//! - [`algorithms::mutant_ucb`] — optimistic selection plus an evolutionary
//!   mutation operator: a selected arm either receives one more sub-train or
//!   spawns a "mutant" neighbor that joins the pool as a fresh arm.
//! - [`algorithms::ucb_e`] — plain optimistic selection with exploration
//!   bonus `sqrt(E / pulls)`.
//! - [`algorithms::random_search`] — `T/N` fresh models, each fully trained.
//! - [`algorithms::successive_halving`] — round-based elimination splitting
//!   the budget evenly across rounds.
//! - [`algorithms::hyperband`] — a sweep of successive-halving brackets
//!   trading pool size against per-model resource.
//! - [`algorithms::ea`] — steady-state evolutionary search with
//!   replace-worst survivor selection.
//!
//! Models are simulated by [`landscapes`]: learning-curve surrogates with
//! controllable locality, noise and an exhaustive ground-truth oracle, so
//! entire experiments replay bit-exactly from their seeds. Every run emits
//! an [`trace::EventTrace`] from which the final state can be rebuilt
//! without re-running the landscape, and the [`harness`] runs seeded
//! replications (in parallel with the `parallel` feature) and aggregates
//! comparison metrics.

pub mod algorithms;
pub mod arm;
pub mod budget;
pub mod harness;
pub mod landscapes;
pub mod policy;
pub mod result;
pub mod rng;
pub mod space;
pub mod trace;

pub use arm::{ArmId, ArmRecord, TrainOutcome};
pub use budget::{BudgetExhausted, BudgetLedger};
pub use policy::{argmax_arm, mutation_probability, running_mean_update, ucb_index, Schedule};
pub use result::{ArmSummary, IncumbentPoint, RunResult};
pub use rng::{RngStream, StreamRng};
pub use space::{SearchSpace, SpaceError};
pub use trace::{Event, EventTrace, TraceError, TraceHeader, TRACE_SCHEMA_VERSION};
