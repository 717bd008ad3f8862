//! Final outcome of a single strategy run.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arm::ArmId;

/// One knot of the incumbent staircase: after `consumed` sub-trains the best
/// empirical mean seen so far rose to `best_mean`. Points are recorded only
/// when the incumbent improves, so the curve is strictly increasing in
/// `best_mean` and strictly increasing in `consumed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncumbentPoint {
    pub consumed: u64,
    pub best_mean: f64,
}

/// Final counters of one arm, as reconstructed by trace replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub id: ArmId,
    pub mean: f64,
    pub pulls: u32,
    pub trains: u32,
    pub parent: Option<ArmId>,
}

/// Everything a run reports: the selected arm with its configuration and
/// train count, the incumbent curve, and per-arm final counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: String,
    pub seed: u64,
    pub selected: ArmId,
    pub selected_config: serde_json::Value,
    pub selected_mean: f64,
    pub selected_trains: u32,
    /// Distinct arms evaluated over the whole run.
    pub tested_models: u64,
    pub consumed: u64,
    pub budget: u64,
    pub incumbent: Vec<IncumbentPoint>,
    pub arms: Vec<ArmSummary>,
}

impl RunResult {
    /// Budget left unspent (remainder policy: never reused).
    pub fn unspent(&self) -> u64 {
        self.budget - self.consumed
    }

    /// Incumbent value after `consumed` sub-trains (step interpolation;
    /// the last value extends past the end of the run).
    pub fn incumbent_at(&self, consumed: u64) -> Option<f64> {
        let mut value = None;
        for point in &self.incumbent {
            if point.consumed > consumed {
                break;
            }
            value = Some(point.best_mean);
        }
        value
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("run result serializes")
    }

    pub fn write_json(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_json_pretty() + "\n")
    }

    pub fn read_json(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incumbent_lookup_steps() {
        let result = RunResult {
            algorithm: "rs".into(),
            seed: 0,
            selected: ArmId(0),
            selected_config: serde_json::json!(0),
            selected_mean: 0.9,
            selected_trains: 3,
            tested_models: 1,
            consumed: 5,
            budget: 5,
            incumbent: vec![
                IncumbentPoint { consumed: 1, best_mean: 0.2 },
                IncumbentPoint { consumed: 4, best_mean: 0.9 },
            ],
            arms: vec![],
        };
        assert_eq!(result.incumbent_at(0), None);
        assert_eq!(result.incumbent_at(1), Some(0.2));
        assert_eq!(result.incumbent_at(3), Some(0.2));
        assert_eq!(result.incumbent_at(4), Some(0.9));
        assert_eq!(result.incumbent_at(100), Some(0.9));
        assert_eq!(result.unspent(), 0);
    }
}
