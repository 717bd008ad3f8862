//! Tabular landscape: explicit per-configuration learning curves and
//! neighbor lists, loaded from JSON.
//!
//! Rewards are exact curve lookups when `deterministic` is set (no RNG
//! draw), so runs on tabular instances can be simulated by hand and frozen
//! as golden traces. Mutation picks uniformly among the listed neighbors; a
//! single-entry neighbor list is followed without consuming a draw.
//!
//! File schema: a top-level object `{ "n_max": int, "deterministic": bool,
//! "noise_sd": float (optional, default 0), "arms": [ { "config_id": int,
//! "curve": [accuracy per cumulative epoch 1..n_max], "neighbors":
//! [config_id], "asymptote": float } ] }`. A checked example lives at
//! `fixtures/tabular3.json`.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::LandscapeError;
use crate::rng::StreamRng;
use crate::space::{SearchSpace, SpaceError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularArmSpec {
    pub config_id: u32,
    /// Accuracy after cumulative epoch 1, 2, ..., indexed from zero.
    pub curve: Vec<f64>,
    /// Mutation targets.
    pub neighbors: Vec<u32>,
    /// Ground-truth asymptotic accuracy used by the oracle.
    pub asymptote: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularLandscapeSpec {
    /// Longest training any strategy may request.
    pub n_max: u32,
    /// Exact curve lookups; no RNG draws at all.
    pub deterministic: bool,
    /// Gaussian reward noise when not deterministic.
    #[serde(default)]
    pub noise_sd: f64,
    pub arms: Vec<TabularArmSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularLandscape {
    spec: TabularLandscapeSpec,
    by_id: HashMap<u32, usize>,
}

impl TabularLandscape {
    pub fn new(spec: TabularLandscapeSpec) -> Result<Self, LandscapeError> {
        if spec.arms.is_empty() {
            return Err(LandscapeError::new("arms", "at least one configuration is required"));
        }
        if !spec.noise_sd.is_finite() || spec.noise_sd < 0.0 {
            return Err(LandscapeError::new("noise_sd", "must be finite and non-negative"));
        }
        if spec.deterministic && spec.noise_sd > 0.0 {
            return Err(LandscapeError::new("noise_sd", "must be 0 for a deterministic landscape"));
        }
        let mut by_id = HashMap::new();
        for arm in &spec.arms {
            if by_id.insert(arm.config_id, by_id.len()).is_some() {
                return Err(LandscapeError::new("arms.config_id", format!("duplicate id {}", arm.config_id)));
            }
            if (arm.curve.len() as u64) < u64::from(spec.n_max) {
                return Err(LandscapeError::new(
                    "arms.curve",
                    format!(
                        "config {} has {} entries, n_max is {}",
                        arm.config_id,
                        arm.curve.len(),
                        spec.n_max
                    ),
                ));
            }
            if arm.curve.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(LandscapeError::new(
                    "arms.curve",
                    format!("config {} has accuracies outside [0, 1]", arm.config_id),
                ));
            }
            if !(0.0..=1.0).contains(&arm.asymptote) {
                return Err(LandscapeError::new(
                    "arms.asymptote",
                    format!("config {} outside [0, 1]", arm.config_id),
                ));
            }
        }
        for arm in &spec.arms {
            for neighbor in &arm.neighbors {
                if !by_id.contains_key(neighbor) {
                    return Err(LandscapeError::new(
                        "arms.neighbors",
                        format!("config {} lists unknown neighbor {neighbor}", arm.config_id),
                    ));
                }
            }
        }
        Ok(Self { spec, by_id })
    }

    pub fn from_json_str(text: &str) -> Result<Self, LandscapeError> {
        let spec: TabularLandscapeSpec = serde_json::from_str(text)
            .map_err(|e| LandscapeError::new("arms", e.to_string()))?;
        Self::new(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self, LandscapeError> {
        let text = fs::read_to_string(path)
            .map_err(|e| LandscapeError::new("path", format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn spec(&self) -> &TabularLandscapeSpec {
        &self.spec
    }

    fn arm(&self, config: u32) -> &TabularArmSpec {
        &self.spec.arms[self.by_id[&config]]
    }
}

impl SearchSpace for TabularLandscape {
    type Config = u32;

    /// Uniform over the listed configurations (one draw).
    fn sample(&self, rng: &mut StreamRng) -> u32 {
        self.spec.arms[rng.random_range(0..self.spec.arms.len())].config_id
    }

    fn mutate(
        &self,
        config: &u32,
        _train_progress: u32,
        rng: &mut StreamRng,
    ) -> Result<u32, SpaceError> {
        let neighbors = &self.arm(*config).neighbors;
        match neighbors.len() {
            0 => Err(SpaceError::MutationImpossible(format!(
                "config {config} lists no neighbors"
            ))),
            1 => Ok(neighbors[0]),
            n => Ok(neighbors[rng.random_range(0..n)]),
        }
    }

    fn sub_train(&self, config: &u32, epoch: u32, rng: &mut StreamRng) -> Result<f64, SpaceError> {
        let curve = &self.arm(*config).curve;
        let Some(&value) = curve.get(epoch as usize) else {
            return Err(SpaceError::CurveExhausted {
                epoch,
                len: curve.len() as u32,
            });
        };
        if self.spec.deterministic || self.spec.noise_sd == 0.0 {
            Ok(value)
        } else {
            let g: f64 = rng.sample(StandardNormal);
            Ok((value + self.spec.noise_sd * g).clamp(0.0, 1.0))
        }
    }

    fn descriptor(&self) -> serde_json::Value {
        json!({
            "kind": "tabular",
            "n_max": self.spec.n_max,
            "deterministic": self.spec.deterministic,
            "noise_sd": self.spec.noise_sd,
            "configs": self.spec.arms.len(),
        })
    }

    fn true_value(&self, config: &u32) -> Option<f64> {
        Some(self.arm(*config).asymptote)
    }

    /// Highest asymptote; ties go to the smallest config id.
    fn oracle_best(&self) -> Result<(u32, f64), SpaceError> {
        let mut ranked: Vec<&TabularArmSpec> = self.spec.arms.iter().collect();
        ranked.sort_by(|a, b| {
            b.asymptote
                .partial_cmp(&a.asymptote)
                .expect("asymptotes are never NaN")
                .then_with(|| a.config_id.cmp(&b.config_id))
        });
        Ok((ranked[0].config_id, ranked[0].asymptote))
    }
}
