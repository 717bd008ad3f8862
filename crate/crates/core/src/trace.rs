//! Event-sourced run traces.
//!
//! Every decision and outcome of a run is appended to an [`EventTrace`]; the
//! trace alone (header + events) is enough to rebuild every arm record, the
//! incumbent curve and the final [`RunResult`] without touching the search
//! space again. Traces serialize to line-delimited JSON: the header object on
//! the first line, then one event object per line.
//!
//! # Schema (version 1)
//!
//! Header fields:
//! - `schema`: format version (this file documents version 1)
//! - `algorithm`: strategy name (`mutant-ucb`, `ucb-e`, `rs`, `sh`,
//!   `hyperband`, `ea`)
//! - `seed`: the 64-bit run seed
//! - `params`: the strategy parameter object
//! - `space`: search-space descriptor, sufficient to rebuild the space
//! - `budget`: sub-train limit T
//! - `consumed`: sub-trains actually consumed (cross-checked against the
//!   number of reward-bearing events on load)
//!
//! Events, tagged by `"event"`:
//! - `init_train {arm, reward, config}` — a model received its first
//!   sub-train. For an unseen `arm` id this creates the arm (ids are dense
//!   and assigned in creation order); for an existing id it restarts the
//!   arm's model from scratch, which round-based strategies do when they
//!   re-train survivors.
//! - `select {round, arm, index}` — optimistic choice at round `round` with
//!   the winning index value.
//! - `sub_train {arm, reward, epoch}` — one more sub-train on an existing
//!   arm; `epoch` is the arm's train count after the update.
//! - `mutate {parent, child, child_reward, config}` — a mutant `child` was
//!   spawned from `parent` and received its first sub-train; counts as a
//!   pull of the parent.
//! - `finalize_train {arm, reward, epoch}` — top-up sub-train on the
//!   already-selected winner.
//! - `select_final {arm}` — the run's output arm. At most finalize_train
//!   events may follow it.
//!
//! `init_train`, `sub_train`, `mutate` and `finalize_train` each consume
//! exactly one unit of budget.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arm::ArmId;
use crate::result::{ArmSummary, IncumbentPoint, RunResult};

/// Version of the on-disk trace format.
pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema: u32,
    pub algorithm: String,
    pub seed: u64,
    pub params: serde_json::Value,
    pub space: serde_json::Value,
    pub budget: u64,
    pub consumed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    InitTrain {
        arm: ArmId,
        reward: f64,
        config: serde_json::Value,
    },
    Select {
        round: u64,
        arm: ArmId,
        index: f64,
    },
    SubTrain {
        arm: ArmId,
        reward: f64,
        epoch: u32,
    },
    Mutate {
        parent: ArmId,
        child: ArmId,
        child_reward: f64,
        config: serde_json::Value,
    },
    FinalizeTrain {
        arm: ArmId,
        reward: f64,
        epoch: u32,
    },
    SelectFinal {
        arm: ArmId,
    },
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::InitTrain { .. } => "init_train",
            Event::Select { .. } => "select",
            Event::SubTrain { .. } => "sub_train",
            Event::Mutate { .. } => "mutate",
            Event::FinalizeTrain { .. } => "finalize_train",
            Event::SelectFinal { .. } => "select_final",
        }
    }

    /// The reward carried by this event, if it consumes budget.
    pub fn reward(&self) -> Option<f64> {
        match *self {
            Event::InitTrain { reward, .. }
            | Event::SubTrain { reward, .. }
            | Event::FinalizeTrain { reward, .. } => Some(reward),
            Event::Mutate { child_reward, .. } => Some(child_reward),
            Event::Select { .. } | Event::SelectFinal { .. } => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("missing trace header")]
    MissingHeader,
    #[error("unsupported trace schema {found}, this build reads version {supported}")]
    SchemaVersion { found: u32, supported: u32 },
    #[error("truncated trace: header present but no events follow")]
    Truncated,
    #[error("inconsistent trace: header records {header} consumed sub-trains but events carry {events} rewards")]
    Inconsistent { header: u64, events: u64 },
    #[error("trace ends without a select_final event")]
    MissingSelection,
    #[error("event {index} ({kind}): {reason}")]
    InvalidEvent {
        index: usize,
        kind: &'static str,
        reason: String,
    },
}

/// Arm state rebuilt purely from trace events.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayArm {
    pub id: ArmId,
    pub config: serde_json::Value,
    pub reward_sum: f64,
    pub trains: u32,
    pub pulls: u32,
    pub parent: Option<ArmId>,
    /// Mutate events whose source is this arm.
    pub mutant_children: u32,
}

impl ReplayArm {
    pub fn mean(&self) -> f64 {
        self.reward_sum / f64::from(self.trains)
    }
}

/// Everything the replay fold learns from a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStats {
    pub arms: Vec<ReplayArm>,
    pub counts: BTreeMap<&'static str, u64>,
    pub selected: ArmId,
    pub selected_trains: u32,
    pub consumed: u64,
    pub incumbent: Vec<IncumbentPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventTrace {
    pub header: TraceHeader,
    pub events: Vec<Event>,
}

impl EventTrace {
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<(), TraceError> {
        fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TraceError> {
        let mut header: Option<TraceHeader> = None;
        let mut events = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            if header.is_none() {
                let parsed: TraceHeader = serde_json::from_str(line)
                    .map_err(|source| TraceError::Parse { line: i + 1, source })?;
                if parsed.schema != TRACE_SCHEMA_VERSION {
                    return Err(TraceError::SchemaVersion {
                        found: parsed.schema,
                        supported: TRACE_SCHEMA_VERSION,
                    });
                }
                header = Some(parsed);
            } else {
                let event: Event = serde_json::from_str(line)
                    .map_err(|source| TraceError::Parse { line: i + 1, source })?;
                events.push(event);
            }
        }
        let header = header.ok_or(TraceError::MissingHeader)?;
        Ok(Self { header, events })
    }

    pub fn read_from(path: &Path) -> Result<Self, TraceError> {
        let text = fs::read_to_string(path)?;
        Self::from_jsonl(&text)
    }

    /// Replay every event, checking the trace invariants along the way:
    /// dense creation-ordered arm ids, rewards in `[0, 1]`, epoch counters
    /// matching train counts, mutant bookkeeping, exactly one final
    /// selection, and the header's consumed count matching the number of
    /// reward-bearing events.
    pub fn validate(&self) -> Result<TraceStats, TraceError> {
        if self.events.is_empty() {
            return Err(TraceError::Truncated);
        }

        let mut arms: Vec<ReplayArm> = Vec::new();
        let mut counts: BTreeMap<&'static str, u64> = BTreeMap::new();
        let mut consumed = 0u64;
        let mut incumbent: Vec<IncumbentPoint> = Vec::new();
        let mut best_seen = f64::NEG_INFINITY;
        let mut selected: Option<ArmId> = None;

        let invalid = |index: usize, kind: &'static str, reason: String| {
            Err(TraceError::InvalidEvent { index, kind, reason })
        };

        for (index, event) in self.events.iter().enumerate() {
            let kind = event.kind();
            *counts.entry(kind).or_insert(0) += 1;

            if let Some(reward) = event.reward() {
                if !(0.0..=1.0).contains(&reward) {
                    return invalid(index, kind, format!("reward {reward} outside [0, 1]"));
                }
                consumed += 1;
            }

            // Nothing but finalize_train may follow select_final.
            if selected.is_some() && !matches!(event, Event::FinalizeTrain { .. }) {
                return invalid(index, kind, "event after select_final".into());
            }

            let mut bump_incumbent = |arms: &Vec<ReplayArm>, arm: ArmId| {
                let mean = arms[arm.index()].mean();
                if mean > best_seen {
                    best_seen = mean;
                    incumbent.push(IncumbentPoint {
                        consumed,
                        best_mean: mean,
                    });
                }
            };

            match *event {
                Event::InitTrain {
                    arm,
                    reward,
                    ref config,
                } => {
                    if arm.index() == arms.len() {
                        arms.push(ReplayArm {
                            id: arm,
                            config: config.clone(),
                            reward_sum: reward,
                            trains: 1,
                            pulls: 1,
                            parent: None,
                            mutant_children: 0,
                        });
                    } else if arm.index() < arms.len() {
                        let record = &mut arms[arm.index()];
                        if record.config != *config {
                            return invalid(
                                index,
                                kind,
                                format!("re-init of arm {arm} changes its configuration"),
                            );
                        }
                        record.reward_sum = reward;
                        record.trains = 1;
                        record.pulls = 1;
                    } else {
                        return invalid(
                            index,
                            kind,
                            format!("arm {arm} breaks dense id order ({} arms so far)", arms.len()),
                        );
                    }
                    bump_incumbent(&arms, arm);
                }
                Event::Select { arm, index: value, .. } => {
                    if arm.index() >= arms.len() {
                        return invalid(index, kind, format!("unknown arm {arm}"));
                    }
                    if !value.is_finite() {
                        return invalid(index, kind, format!("non-finite index value {value}"));
                    }
                }
                Event::SubTrain { arm, reward, epoch } => {
                    if arm.index() >= arms.len() {
                        return invalid(index, kind, format!("unknown arm {arm}"));
                    }
                    let record = &mut arms[arm.index()];
                    record.reward_sum += reward;
                    record.trains += 1;
                    record.pulls += 1;
                    if epoch != record.trains {
                        return invalid(
                            index,
                            kind,
                            format!("epoch {epoch} but arm {arm} has {} trains", record.trains),
                        );
                    }
                    bump_incumbent(&arms, arm);
                }
                Event::Mutate {
                    parent,
                    child,
                    child_reward,
                    ref config,
                } => {
                    if parent.index() >= arms.len() {
                        return invalid(index, kind, format!("unknown parent {parent}"));
                    }
                    if child.index() != arms.len() {
                        return invalid(
                            index,
                            kind,
                            format!("child {child} breaks dense id order ({} arms so far)", arms.len()),
                        );
                    }
                    arms[parent.index()].pulls += 1;
                    arms[parent.index()].mutant_children += 1;
                    arms.push(ReplayArm {
                        id: child,
                        config: config.clone(),
                        reward_sum: child_reward,
                        trains: 1,
                        pulls: 1,
                        parent: Some(parent),
                        mutant_children: 0,
                    });
                    bump_incumbent(&arms, child);
                }
                Event::FinalizeTrain { arm, reward, epoch } => {
                    match selected {
                        None => {
                            return invalid(index, kind, "finalize_train before select_final".into())
                        }
                        Some(winner) if winner != arm => {
                            return invalid(
                                index,
                                kind,
                                format!("finalizes arm {arm} but {winner} was selected"),
                            );
                        }
                        Some(_) => {}
                    }
                    let record = &mut arms[arm.index()];
                    record.reward_sum += reward;
                    record.trains += 1;
                    record.pulls += 1;
                    if epoch != record.trains {
                        return invalid(
                            index,
                            kind,
                            format!("epoch {epoch} but arm {arm} has {} trains", record.trains),
                        );
                    }
                    bump_incumbent(&arms, arm);
                }
                Event::SelectFinal { arm } => {
                    if arm.index() >= arms.len() {
                        return invalid(index, kind, format!("unknown arm {arm}"));
                    }
                    selected = Some(arm);
                }
            }
        }

        let selected = selected.ok_or(TraceError::MissingSelection)?;
        if consumed != self.header.consumed {
            return Err(TraceError::Inconsistent {
                header: self.header.consumed,
                events: consumed,
            });
        }

        let selected_trains = arms[selected.index()].trains;
        Ok(TraceStats {
            arms,
            counts,
            selected,
            selected_trains,
            consumed,
            incumbent,
        })
    }

    /// Rebuild the [`RunResult`] from events alone. Equals the result the
    /// original run produced, bit for bit.
    pub fn replay(&self) -> Result<RunResult, TraceError> {
        let stats = self.validate()?;
        let winner = &stats.arms[stats.selected.index()];
        Ok(RunResult {
            algorithm: self.header.algorithm.clone(),
            seed: self.header.seed,
            selected: stats.selected,
            selected_config: winner.config.clone(),
            selected_mean: winner.mean(),
            selected_trains: winner.trains,
            tested_models: stats.arms.len() as u64,
            consumed: stats.consumed,
            budget: self.header.budget,
            incumbent: stats.incumbent,
            arms: stats
                .arms
                .iter()
                .map(|a| ArmSummary {
                    id: a.id,
                    mean: a.mean(),
                    pulls: a.pulls,
                    trains: a.trains,
                    parent: a.parent,
                })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn header(consumed: u64) -> TraceHeader {
        TraceHeader {
            schema: TRACE_SCHEMA_VERSION,
            algorithm: "test".into(),
            seed: 0,
            params: json!({}),
            space: json!({}),
            budget: 10,
            consumed,
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let trace = EventTrace {
            header: header(3),
            events: vec![
                Event::InitTrain {
                    arm: ArmId(0),
                    reward: 0.5,
                    config: json!([0, 1]),
                },
                Event::Select {
                    round: 2,
                    arm: ArmId(0),
                    index: 0.7236,
                },
                Event::SubTrain {
                    arm: ArmId(0),
                    reward: 0.6,
                    epoch: 2,
                },
                Event::Mutate {
                    parent: ArmId(0),
                    child: ArmId(1),
                    child_reward: 0.4,
                    config: json!([1, 1]),
                },
                Event::SelectFinal { arm: ArmId(0) },
            ],
        };
        let text = trace.to_jsonl();
        let back = EventTrace::from_jsonl(&text).unwrap();
        assert_eq!(trace, back);
        // Serialization is deterministic.
        assert_eq!(text, back.to_jsonl());
    }

    #[test]
    fn empty_event_list_is_truncated() {
        let trace = EventTrace {
            header: header(0),
            events: vec![],
        };
        assert!(matches!(trace.validate(), Err(TraceError::Truncated)));
    }

    #[test]
    fn consumed_mismatch_is_inconsistent() {
        let trace = EventTrace {
            header: header(5),
            events: vec![
                Event::InitTrain {
                    arm: ArmId(0),
                    reward: 0.5,
                    config: json!(0),
                },
                Event::SelectFinal { arm: ArmId(0) },
            ],
        };
        assert!(matches!(
            trace.validate(),
            Err(TraceError::Inconsistent { header: 5, events: 1 })
        ));
    }

    #[test]
    fn out_of_range_reward_names_the_event() {
        let trace = EventTrace {
            header: header(2),
            events: vec![
                Event::InitTrain {
                    arm: ArmId(0),
                    reward: 0.5,
                    config: json!(0),
                },
                Event::SubTrain {
                    arm: ArmId(0),
                    reward: 1.5,
                    epoch: 2,
                },
                Event::SelectFinal { arm: ArmId(0) },
            ],
        };
        match trace.validate() {
            Err(TraceError::InvalidEvent { index, kind, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(kind, "sub_train");
            }
            other => panic!("expected InvalidEvent, got {other:?}"),
        }
    }

    #[test]
    fn mutant_bookkeeping_in_replay() {
        let trace = EventTrace {
            header: header(3),
            events: vec![
                Event::InitTrain {
                    arm: ArmId(0),
                    reward: 0.5,
                    config: json!(0),
                },
                Event::Mutate {
                    parent: ArmId(0),
                    child: ArmId(1),
                    child_reward: 0.9,
                    config: json!(1),
                },
                Event::SubTrain {
                    arm: ArmId(1),
                    reward: 0.7,
                    epoch: 2,
                },
                Event::SelectFinal { arm: ArmId(1) },
            ],
        };
        let stats = trace.validate().unwrap();
        assert_eq!(stats.arms[0].pulls, 2);
        assert_eq!(stats.arms[0].trains, 1);
        assert_eq!(stats.arms[0].mutant_children, 1);
        assert_eq!(stats.arms[1].parent, Some(ArmId(0)));
        assert_eq!(stats.arms[1].trains, 2);
        // Incumbent staircase: 0.5 after init, 0.9 after the mutant's first
        // reward; the 0.7 sub-train drags the child's mean to 0.8 < 0.9.
        assert_eq!(
            stats.incumbent,
            vec![
                IncumbentPoint { consumed: 1, best_mean: 0.5 },
                IncumbentPoint { consumed: 2, best_mean: 0.9 },
            ]
        );
    }

    #[test]
    fn schema_version_is_enforced() {
        let mut h = header(0);
        h.schema = 99;
        let text = EventTrace {
            header: h,
            events: vec![],
        }
        .to_jsonl();
        assert!(matches!(
            EventTrace::from_jsonl(&text),
            Err(TraceError::SchemaVersion { found: 99, .. })
        ));
    }

    #[test]
    fn reinit_resets_counters() {
        let trace = EventTrace {
            header: header(4),
            events: vec![
                Event::InitTrain {
                    arm: ArmId(0),
                    reward: 0.2,
                    config: json!(0),
                },
                Event::SubTrain {
                    arm: ArmId(0),
                    reward: 0.4,
                    epoch: 2,
                },
                Event::InitTrain {
                    arm: ArmId(0),
                    reward: 0.25,
                    config: json!(0),
                },
                Event::SubTrain {
                    arm: ArmId(0),
                    reward: 0.45,
                    epoch: 2,
                },
                Event::SelectFinal { arm: ArmId(0) },
            ],
        };
        let stats = trace.validate().unwrap();
        assert_eq!(stats.arms[0].trains, 2);
        assert!((stats.arms[0].mean() - 0.35).abs() < 1e-15);
    }
}
