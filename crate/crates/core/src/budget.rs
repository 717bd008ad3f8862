//! Sub-train budget accounting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Returned when a consume would push past the budget limit. Strategies are
/// expected to check remaining budget before training, so hitting this from
/// a run indicates a scheduling bug.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("budget exhausted: all {limit} sub-trains already consumed")]
pub struct BudgetExhausted {
    pub limit: u64,
}

/// Append-only counter of consumed sub-trains; the single source of truth
/// for budget accounting in a run. Every sub-train, including initialization
/// and finalization ones, goes through [`BudgetLedger::consume`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetLedger {
    limit: u64,
    consumed: u64,
}

impl BudgetLedger {
    pub fn new(limit: u64) -> Self {
        assert!(limit >= 1, "budget limit must be positive");
        Self { limit, consumed: 0 }
    }

    pub fn consume(&mut self) -> Result<(), BudgetExhausted> {
        if self.consumed == self.limit {
            return Err(BudgetExhausted { limit: self.limit });
        }
        self.consumed += 1;
        Ok(())
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.consumed
    }
}
