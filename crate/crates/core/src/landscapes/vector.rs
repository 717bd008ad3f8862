//! Vector landscape: coordinates over a finite alphabet, scored by Hamming
//! distance to a hidden optimum.
//!
//! A configuration `c` has asymptotic accuracy
//! `A(c) = clamp(a_max - slope * hamming(c, optimum), a_min, a_max)`, and a
//! model trained for `n` epochs rewards `A(c) * (1 - curve_rate^n)` plus
//! optional overfitting decay and Gaussian noise, clamped to `[0, 1]`.
//! Mutation resamples one coordinate, so parent and mutant asymptotes differ
//! by at most `slope`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::LandscapeError;
use crate::rng::{RngStream, StreamRng};
use crate::space::{SearchSpace, SpaceError};

/// Largest space the exhaustive oracle will scan.
const ORACLE_SCAN_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverfitSpec {
    /// Epoch after which accuracy starts decaying.
    pub peak_epoch: u32,
    /// Accuracy lost per epoch past the peak.
    pub decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorLandscapeSpec {
    /// Coordinates per configuration.
    pub dims: u32,
    /// Values per coordinate (each in `0..alphabet`).
    pub alphabet: u16,
    /// Explicit optimum; drawn from `seed` when absent.
    #[serde(default)]
    pub optimum: Option<Vec<u16>>,
    #[serde(default = "default_a_max")]
    pub a_max: f64,
    #[serde(default = "default_a_min")]
    pub a_min: f64,
    /// Asymptote lost per unit of Hamming distance.
    pub slope: f64,
    /// Geometric learning-curve rate ρ in (0, 1).
    #[serde(default = "default_curve_rate")]
    pub curve_rate: f64,
    /// Standard deviation of the per-reward Gaussian noise.
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default)]
    pub overfit: Option<OverfitSpec>,
    /// Seed for the hidden optimum when `optimum` is absent.
    #[serde(default)]
    pub seed: u64,
}

fn default_a_max() -> f64 {
    0.9
}

fn default_a_min() -> f64 {
    0.1
}

fn default_curve_rate() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorLandscape {
    spec: VectorLandscapeSpec,
    optimum: Vec<u16>,
}

impl VectorLandscape {
    pub fn new(spec: VectorLandscapeSpec) -> Result<Self, LandscapeError> {
        if spec.dims < 1 {
            return Err(LandscapeError::new("dims", "must be at least 1"));
        }
        if spec.alphabet < 1 {
            return Err(LandscapeError::new("alphabet", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&spec.a_min) {
            return Err(LandscapeError::new("a_min", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&spec.a_max) || spec.a_max < spec.a_min {
            return Err(LandscapeError::new("a_max", "must lie in [a_min, 1]"));
        }
        if !spec.slope.is_finite() || spec.slope < 0.0 {
            return Err(LandscapeError::new("slope", "must be finite and non-negative"));
        }
        if !(spec.curve_rate > 0.0 && spec.curve_rate < 1.0) {
            return Err(LandscapeError::new("curve_rate", "must lie strictly inside (0, 1)"));
        }
        if !spec.noise_sd.is_finite() || spec.noise_sd < 0.0 {
            return Err(LandscapeError::new("noise_sd", "must be finite and non-negative"));
        }
        if let Some(overfit) = &spec.overfit {
            if !overfit.decay.is_finite() || overfit.decay < 0.0 {
                return Err(LandscapeError::new("overfit.decay", "must be finite and non-negative"));
            }
        }
        if let Some(optimum) = &spec.optimum {
            if optimum.len() != spec.dims as usize {
                return Err(LandscapeError::new("optimum", format!("must have {} coordinates", spec.dims)));
            }
            if optimum.iter().any(|&v| v >= spec.alphabet) {
                return Err(LandscapeError::new("optimum", "coordinate outside the alphabet"));
            }
        }
        let optimum = match &spec.optimum {
            Some(v) => v.clone(),
            None => {
                let mut rng = RngStream::new(spec.seed).substream("optimum");
                (0..spec.dims).map(|_| rng.random_range(0..spec.alphabet)).collect()
            }
        };
        Ok(Self { spec, optimum })
    }

    pub fn spec(&self) -> &VectorLandscapeSpec {
        &self.spec
    }

    pub fn optimum(&self) -> &[u16] {
        &self.optimum
    }

    pub fn hamming(&self, config: &[u16]) -> u32 {
        config
            .iter()
            .zip(&self.optimum)
            .filter(|(a, b)| a != b)
            .count() as u32
    }

    /// Asymptotic accuracy of a configuration.
    pub fn asymptote(&self, config: &[u16]) -> f64 {
        (self.spec.a_max - self.spec.slope * f64::from(self.hamming(config)))
            .clamp(self.spec.a_min, self.spec.a_max)
    }

    /// Noise-free mean reward after epoch `epoch + 1`.
    fn curve_mean(&self, config: &[u16], epoch: u32) -> f64 {
        let n = epoch + 1;
        let mut m = self.asymptote(config) * (1.0 - self.spec.curve_rate.powi(n as i32));
        if let Some(overfit) = &self.spec.overfit {
            if n > overfit.peak_epoch {
                m -= overfit.decay * f64::from(n - overfit.peak_epoch);
            }
        }
        m
    }
}

impl SearchSpace for VectorLandscape {
    type Config = Vec<u16>;

    fn sample(&self, rng: &mut StreamRng) -> Vec<u16> {
        (0..self.spec.dims)
            .map(|_| rng.random_range(0..self.spec.alphabet))
            .collect()
    }

    /// Resample one uniformly chosen coordinate to a different value; the
    /// result differs from the input in exactly one position.
    fn mutate(
        &self,
        config: &Vec<u16>,
        _train_progress: u32,
        rng: &mut StreamRng,
    ) -> Result<Vec<u16>, SpaceError> {
        if self.spec.alphabet < 2 {
            return Err(SpaceError::MutationImpossible(
                "alphabet of size 1 has no neighbors".into(),
            ));
        }
        let mut child = config.clone();
        let position = rng.random_range(0..child.len());
        let mut value = rng.random_range(0..self.spec.alphabet - 1);
        if value >= child[position] {
            value += 1;
        }
        child[position] = value;
        Ok(child)
    }

    /// One-point crossover; with a single dimension there is no interior cut
    /// point and the child is a copy of `a`.
    fn crossover(
        &self,
        a: &Vec<u16>,
        b: &Vec<u16>,
        rng: &mut StreamRng,
    ) -> Result<Vec<u16>, SpaceError> {
        if a.len() == 1 {
            return Ok(a.clone());
        }
        let cut = rng.random_range(1..a.len());
        let mut child = a[..cut].to_vec();
        child.extend_from_slice(&b[cut..]);
        Ok(child)
    }

    fn supports_crossover(&self) -> bool {
        true
    }

    fn sub_train(
        &self,
        config: &Vec<u16>,
        epoch: u32,
        rng: &mut StreamRng,
    ) -> Result<f64, SpaceError> {
        let mut reward = self.curve_mean(config, epoch);
        if self.spec.noise_sd > 0.0 {
            let g: f64 = rng.sample(StandardNormal);
            reward += self.spec.noise_sd * g;
        }
        Ok(reward.clamp(0.0, 1.0))
    }

    fn descriptor(&self) -> serde_json::Value {
        json!({
            "kind": "vector",
            "dims": self.spec.dims,
            "alphabet": self.spec.alphabet,
            "a_max": self.spec.a_max,
            "a_min": self.spec.a_min,
            "slope": self.spec.slope,
            "curve_rate": self.spec.curve_rate,
            "noise_sd": self.spec.noise_sd,
            "overfit": self.spec.overfit,
            "optimum": self.optimum,
        })
    }

    fn true_value(&self, config: &Vec<u16>) -> Option<f64> {
        Some(self.asymptote(config))
    }

    /// Exhaustive scan in lexicographic order, keeping the first strict
    /// maximum, so ties resolve to the lexicographically smallest config.
    fn oracle_best(&self) -> Result<(Vec<u16>, f64), SpaceError> {
        let size = (u64::from(self.spec.alphabet)).checked_pow(self.spec.dims).filter(|&s| s <= ORACLE_SCAN_LIMIT);
        let Some(_size) = size else {
            return Err(SpaceError::OracleUnavailable(format!(
                "{}^{} configurations exceed the scan limit {ORACLE_SCAN_LIMIT}",
                self.spec.alphabet, self.spec.dims
            )));
        };
        let mut current = vec![0u16; self.spec.dims as usize];
        let mut best = current.clone();
        let mut best_value = self.asymptote(&current);
        loop {
            // Odometer increment in lexicographic order.
            let mut position = current.len();
            loop {
                if position == 0 {
                    let value = self.asymptote(&best);
                    debug_assert_eq!(value, best_value);
                    return Ok((best, best_value));
                }
                position -= 1;
                current[position] += 1;
                if current[position] < self.spec.alphabet {
                    break;
                }
                current[position] = 0;
            }
            let value = self.asymptote(&current);
            if value > best_value {
                best_value = value;
                best = current.clone();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> VectorLandscapeSpec {
        VectorLandscapeSpec {
            dims: 4,
            alphabet: 3,
            optimum: Some(vec![0, 1, 2, 0]),
            a_max: 0.9,
            a_min: 0.1,
            slope: 0.1,
            curve_rate: 0.5,
            noise_sd: 0.0,
            overfit: None,
            seed: 0,
        }
    }

    #[test]
    fn noise_free_curve_values() {
        let mut spec = base_spec();
        spec.a_max = 0.8;
        spec.slope = 0.0;
        let space = VectorLandscape::new(spec).unwrap();
        let mut rng = RngStream::new(0).substream("train");
        let config = vec![0, 0, 0, 0];
        // A = 0.8, rho = 0.5: first reward 0.8 * (1 - 0.5) = 0.4.
        let reward = space.sub_train(&config, 0, &mut rng).unwrap();
        assert!((reward - 0.4).abs() < 1e-15);
        // Deep into the curve the asymptote is approached from below.
        let late = space.sub_train(&config, 19, &mut rng).unwrap();
        assert!((late - 0.8 * (1.0 - 0.5f64.powi(20))).abs() < 1e-15);
        assert!(late < 0.8);
    }

    #[test]
    fn overfit_decays_past_peak() {
        let mut spec = base_spec();
        spec.a_max = 1.0;
        spec.slope = 0.0;
        spec.curve_rate = 1e-12;
        spec.overfit = Some(OverfitSpec {
            peak_epoch: 3,
            decay: 0.1,
        });
        let space = VectorLandscape::new(spec).unwrap();
        let mut rng = RngStream::new(0).substream("train");
        // Epoch 4 -> n = 5, two epochs past the peak: 1.0 - 0.1 * 2 = 0.8.
        let reward = space.sub_train(&vec![0, 0, 0, 0], 4, &mut rng).unwrap();
        assert!((reward - 0.8).abs() < 1e-12);
    }

    #[test]
    fn mutation_moves_exactly_one_coordinate() {
        let space = VectorLandscape::new(base_spec()).unwrap();
        let mut sample_rng = RngStream::new(1).substream("sample");
        let mut mutate_rng = RngStream::new(1).substream("mutate");
        for _ in 0..10_000 {
            let config = space.sample(&mut sample_rng);
            let child = space.mutate(&config, 0, &mut mutate_rng).unwrap();
            let hamming = config
                .iter()
                .zip(&child)
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(hamming, 1);
            assert_eq!(child.len(), config.len());
            assert!(child.iter().all(|&v| v < 3));
        }
    }

    #[test]
    fn binary_single_coordinate_flips() {
        let mut spec = base_spec();
        spec.dims = 1;
        spec.alphabet = 2;
        spec.optimum = Some(vec![0]);
        let space = VectorLandscape::new(spec).unwrap();
        let mut rng = RngStream::new(0).substream("mutate");
        assert_eq!(space.mutate(&vec![0], 0, &mut rng).unwrap(), vec![1]);
        assert_eq!(space.mutate(&vec![1], 0, &mut rng).unwrap(), vec![0]);
    }

    #[test]
    fn unit_alphabet_cannot_mutate() {
        let mut spec = base_spec();
        spec.alphabet = 1;
        spec.optimum = Some(vec![0, 0, 0, 0]);
        let space = VectorLandscape::new(spec).unwrap();
        let mut rng = RngStream::new(0).substream("mutate");
        assert!(matches!(
            space.mutate(&vec![0, 0, 0, 0], 0, &mut rng),
            Err(SpaceError::MutationImpossible(_))
        ));
    }

    #[test]
    fn crossover_takes_prefix_and_suffix() {
        let space = VectorLandscape::new(base_spec()).unwrap();
        let mut rng = RngStream::new(7).substream("mutate");
        let a = vec![0, 0, 0, 0];
        let b = vec![1, 1, 1, 1];
        for _ in 0..100 {
            let child = space.crossover(&a, &b, &mut rng).unwrap();
            // Some prefix of zeros followed by ones; both sides non-empty.
            let ones = child.iter().filter(|&&v| v == 1).count();
            assert!(ones >= 1 && ones <= 3, "child {child:?}");
            let first_one = child.iter().position(|&v| v == 1).unwrap();
            assert!(child[..first_one].iter().all(|&v| v == 0));
            assert!(child[first_one..].iter().all(|&v| v == 1));
        }
        // Identical parents produce identical children.
        assert_eq!(space.crossover(&a, &a, &mut rng).unwrap(), a);
    }

    #[test]
    fn oracle_matches_brute_force() {
        let space = VectorLandscape::new(base_spec()).unwrap();
        let (config, value) = space.oracle_best().unwrap();
        assert_eq!(config, vec![0, 1, 2, 0]);
        assert_eq!(value, 0.9);

        // Independent brute-force recomputation over all 81 configurations.
        let mut best = f64::NEG_INFINITY;
        let mut best_config = None;
        for a in 0..3u16 {
            for b in 0..3u16 {
                for c in 0..3u16 {
                    for d in 0..3u16 {
                        let candidate = vec![a, b, c, d];
                        let v = space.asymptote(&candidate);
                        if v > best {
                            best = v;
                            best_config = Some(candidate);
                        }
                    }
                }
            }
        }
        assert_eq!(best, value);
        assert_eq!(best_config.unwrap(), config);
    }

    #[test]
    fn zero_slope_ties_resolve_lexicographically() {
        let mut spec = base_spec();
        spec.slope = 0.0;
        spec.optimum = Some(vec![2, 2, 2, 2]);
        let space = VectorLandscape::new(spec).unwrap();
        let (config, value) = space.oracle_best().unwrap();
        assert_eq!(config, vec![0, 0, 0, 0]);
        assert_eq!(value, 0.9);
    }

    #[test]
    fn oversized_space_reports_oracle_unavailable() {
        let mut spec = base_spec();
        spec.dims = 30;
        spec.alphabet = 5;
        spec.optimum = None;
        let space = VectorLandscape::new(spec).unwrap();
        assert!(matches!(
            space.oracle_best(),
            Err(SpaceError::OracleUnavailable(_))
        ));
    }

    #[test]
    fn locality_bound_on_asymptotes() {
        let space = VectorLandscape::new(base_spec()).unwrap();
        let mut sample_rng = RngStream::new(3).substream("sample");
        let mut mutate_rng = RngStream::new(3).substream("mutate");
        for _ in 0..10_000 {
            let parent = space.sample(&mut sample_rng);
            let child = space.mutate(&parent, 0, &mut mutate_rng).unwrap();
            let gap = (space.asymptote(&parent) - space.asymptote(&child)).abs();
            assert!(gap <= space.spec().slope + 1e-15);
        }
    }

    #[test]
    fn rewards_clamped_for_every_seed() {
        let mut spec = base_spec();
        spec.noise_sd = 0.5;
        let space = VectorLandscape::new(spec).unwrap();
        let mut train = RngStream::new(5).substream("train");
        let mut sample = RngStream::new(5).substream("sample");
        for epoch in 0..500 {
            let config = space.sample(&mut sample);
            let reward = space.sub_train(&config, epoch % 30, &mut train).unwrap();
            assert!((0.0..=1.0).contains(&reward));
        }
    }

    #[test]
    fn invalid_specs_name_the_field() {
        let mut spec = base_spec();
        spec.curve_rate = 1.0;
        let err = VectorLandscape::new(spec).unwrap_err();
        assert_eq!(err.field, "curve_rate");

        let mut spec = base_spec();
        spec.optimum = Some(vec![0, 0]);
        assert_eq!(VectorLandscape::new(spec).unwrap_err().field, "optimum");
    }
}
