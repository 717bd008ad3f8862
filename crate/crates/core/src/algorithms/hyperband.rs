//! Hyperband: a sweep of successive-halving brackets trading pool size
//! against per-model resource.
//!
//! With maximum per-model resource `R` and halving rate `η`, bracket
//! `s = s_max .. 0` (where `s_max = ⌊log_η R⌋`) starts
//! `n_s = ⌈(s_max+1)/(s+1) · ηˢ⌉` fresh configurations at per-arm resource
//! `⌊R / ηˢ⌋` and refines them over `s+1` rounds: round `i` re-trains the
//! surviving `⌊n_s / ηⁱ⌋` arms from scratch with `⌊R / η^(s-i)⌋` sub-trains
//! each. No model instance ever absorbs more than `R` sub-trains. The sweep
//! over all brackets repeats until issuing the next sub-train would exceed
//! the budget, then the run stops mid-bracket and the best arm by empirical
//! mean (across everything ever sampled) is selected.

use serde::{Deserialize, Serialize};

use super::{invalid, RunError, RunState};
use crate::arm::ArmId;
use crate::result::RunResult;
use crate::space::SearchSpace;
use crate::trace::EventTrace;

pub const NAME: &str = "hyperband";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperbandParams {
    /// Maximum resource per configuration (R); equal to the per-model cap N.
    pub max_resource: u32,
    /// Halving rate η ≥ 2.
    pub eta: u32,
    /// Total sub-train budget T; sweeps truncate against it.
    pub budget: u64,
}

impl HyperbandParams {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.max_resource < 1 {
            return Err(invalid("max_resource must be at least 1"));
        }
        if self.eta < 2 {
            return Err(invalid("eta must be at least 2"));
        }
        if self.budget < 1 {
            return Err(invalid("budget must be at least 1"));
        }
        Ok(())
    }
}

/// One elimination round inside a bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundPlan {
    /// Arms trained in this round.
    pub arms: u32,
    /// Sub-trains each of them receives (from scratch).
    pub resource: u32,
}

/// One successive-halving bracket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketPlan {
    /// Bracket index s (s_max down to 0).
    pub s: u32,
    pub rounds: Vec<RoundPlan>,
}

impl BracketPlan {
    /// Fresh configurations sampled by this bracket.
    pub fn initial_arms(&self) -> u32 {
        self.rounds[0].arms
    }

    /// Sub-trains the bracket consumes when not truncated.
    pub fn cost(&self) -> u64 {
        self.rounds
            .iter()
            .map(|r| u64::from(r.arms) * u64::from(r.resource))
            .sum()
    }
}

/// Largest `s` with `eta^s <= r`, in exact integer arithmetic.
fn floor_log(eta: u32, r: u32) -> u32 {
    let mut s = 0;
    let mut reach = u64::from(eta);
    while reach <= u64::from(r) {
        reach *= u64::from(eta);
        s += 1;
    }
    s
}

/// The canonical bracket construction for one sweep.
pub fn schedule(max_resource: u32, eta: u32) -> Vec<BracketPlan> {
    assert!(max_resource >= 1 && eta >= 2);
    let s_max = floor_log(eta, max_resource);
    (0..=s_max)
        .rev()
        .map(|s| {
            let eta_s = u64::from(eta).pow(s);
            // ceil((s_max + 1) / (s + 1) * eta^s)
            let n_s = (u64::from(s_max + 1) * eta_s).div_ceil(u64::from(s + 1));
            let rounds = (0..=s)
                .map(|i| RoundPlan {
                    arms: (n_s / u64::from(eta).pow(i)) as u32,
                    resource: max_resource / eta.pow(s - i),
                })
                .collect();
            BracketPlan { s, rounds }
        })
        .collect()
}

pub fn run<S: SearchSpace>(
    space: &S,
    params: &HyperbandParams,
    seed: u64,
) -> Result<(RunResult, EventTrace), RunError> {
    params.validate()?;
    let mut state = RunState::new(space, NAME, seed, params.budget, params);
    let plan = schedule(params.max_resource, params.eta);

    'sweeps: loop {
        for bracket in &plan {
            let mut active: Vec<ArmId> = Vec::new();
            for (i, round) in bracket.rounds.iter().enumerate() {
                if i == 0 {
                    for _ in 0..round.arms {
                        if state.remaining() == 0 {
                            break 'sweeps;
                        }
                        let config = state.sample_config();
                        let id = state.init_new_arm(config)?;
                        active.push(id);
                        for _ in 1..round.resource {
                            if state.remaining() == 0 {
                                break 'sweeps;
                            }
                            state.train_arm(id)?;
                        }
                    }
                } else {
                    active = state.top_by_mean(&active, round.arms as usize);
                    for &id in &active {
                        if state.remaining() == 0 {
                            break 'sweeps;
                        }
                        state.reinit_arm(id)?;
                        for _ in 1..round.resource {
                            if state.remaining() == 0 {
                                break 'sweeps;
                            }
                            state.train_arm(id)?;
                        }
                    }
                }
            }
        }
        if state.remaining() == 0 {
            break;
        }
    }

    let winner = state.select_final();
    Ok(state.finish(winner))
}
