//! Seeded multi-replication experiment runner.
//!
//! An experiment runs every (algorithm, replication) pair on one shared
//! landscape; replication `r` uses seed `base_seed + r` for every algorithm,
//! and all algorithms draw configurations from the same sampling stream, so
//! their initial pools coincide. Replications are independent and run in
//! parallel when the `parallel` feature is enabled and `workers > 1`;
//! results are joined in (algorithm, replication) order, so outputs are
//! byte-identical whatever the scheduling.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{
    ea, hyperband, mutant_ucb, random_search, successive_halving, ucb_e, EaParams,
    HyperbandParams, MutantUcbParams, RandomSearchParams, RunError, SuccessiveHalvingParams,
    UcbEParams,
};
use crate::result::RunResult;
use crate::space::SearchSpace;
use crate::trace::EventTrace;

/// One algorithm with its parameters, as listed in an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "kebab-case")]
pub enum AlgoSpec {
    MutantUcb(MutantUcbParams),
    UcbE(UcbEParams),
    Rs(RandomSearchParams),
    Sh(SuccessiveHalvingParams),
    Hyperband(HyperbandParams),
    Ea(EaParams),
}

impl AlgoSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgoSpec::MutantUcb(_) => mutant_ucb::NAME,
            AlgoSpec::UcbE(_) => ucb_e::NAME,
            AlgoSpec::Rs(_) => random_search::NAME,
            AlgoSpec::Sh(_) => successive_halving::NAME,
            AlgoSpec::Hyperband(_) => hyperband::NAME,
            AlgoSpec::Ea(_) => ea::NAME,
        }
    }

    pub fn run<S: SearchSpace>(
        &self,
        space: &S,
        seed: u64,
    ) -> Result<(RunResult, EventTrace), RunError> {
        match self {
            AlgoSpec::MutantUcb(p) => mutant_ucb::run(space, p, seed),
            AlgoSpec::UcbE(p) => ucb_e::run(space, p, seed),
            AlgoSpec::Rs(p) => random_search::run(space, p, seed),
            AlgoSpec::Sh(p) => successive_halving::run(space, p, seed),
            AlgoSpec::Hyperband(p) => hyperband::run(space, p, seed),
            AlgoSpec::Ea(p) => ea::run(space, p, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub algorithms: Vec<AlgoSpec>,
    pub replications: u32,
    pub base_seed: u64,
    /// Replication-level parallelism; 1 runs everything sequentially.
    pub workers: usize,
    /// Persist one trace file per run under `<out_dir>/traces/`.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{algorithm} (seed {seed}): {source}")]
    Run {
        algorithm: &'static str,
        seed: u64,
        source: RunError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: io::Error,
    },
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("invalid comparison: {0}")]
    InvalidComparison(String),
}

/// Mean and sample standard deviation across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, sd }
    }
}

/// Metrics of one (algorithm, replication) run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepMetrics {
    pub seed: u64,
    pub tested_models: u64,
    pub consumed: u64,
    pub selected_mean: f64,
    /// Oracle asymptote of the selected configuration, when available.
    pub true_accuracy: Option<f64>,
    /// Selected configuration strictly below the oracle optimum.
    pub misidentified: Option<bool>,
}

/// Aggregated metrics of one algorithm across all replications.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoMetrics {
    pub algorithm: &'static str,
    pub reps: Vec<RepMetrics>,
    pub tested_models: Stat,
    pub final_observed: Stat,
    pub final_true: Option<Stat>,
    pub misidentification_rate: Option<f64>,
    pub subtrains: Stat,
    /// Mean incumbent accuracy at each consumed sub-train (1-indexed by
    /// position); flat-extended past each run's end.
    pub incumbent_mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub base_seed: u64,
    pub replications: u32,
    pub algorithms: Vec<AlgoMetrics>,
}

impl ExperimentSummary {
    pub fn metrics(&self, algorithm: &str) -> Option<&AlgoMetrics> {
        self.algorithms.iter().find(|m| m.algorithm == algorithm)
    }
}

pub fn run_experiment<S: SearchSpace + Sync>(
    space: &S,
    spec: &ExperimentSpec,
) -> Result<ExperimentSummary, HarnessError> {
    if spec.algorithms.is_empty() {
        return Err(HarnessError::InvalidSpec("no algorithms listed".into()));
    }
    if spec.replications < 1 {
        return Err(HarnessError::InvalidSpec(
            "at least one replication is required".into(),
        ));
    }

    let traces_dir = match &spec.out_dir {
        Some(dir) => {
            let traces = dir.join("traces");
            fs::create_dir_all(&traces).map_err(|source| HarnessError::Io {
                path: traces.clone(),
                source,
            })?;
            Some(traces)
        }
        None => None,
    };

    let jobs: Vec<(usize, u32)> = (0..spec.algorithms.len())
        .flat_map(|a| (0..spec.replications).map(move |r| (a, r)))
        .collect();

    let run_one = |&(algo_idx, rep): &(usize, u32)| -> Result<RunResult, HarnessError> {
        let algo = &spec.algorithms[algo_idx];
        let seed = spec.base_seed + u64::from(rep);
        let (result, trace) = algo.run(space, seed).map_err(|source| HarnessError::Run {
            algorithm: algo.name(),
            seed,
            source,
        })?;
        if let Some(dir) = &traces_dir {
            let path = dir.join(format!("{}-rep{rep:03}.trace.jsonl", algo.name()));
            trace.write_to(&path).map_err(|e| HarnessError::Io {
                path: path.clone(),
                source: match e {
                    crate::trace::TraceError::Io(io) => io,
                    other => io::Error::other(other.to_string()),
                },
            })?;
        }
        Ok(result)
    };

    let outcomes = execute(&jobs, spec.workers, run_one);

    // A failed replication aborts the experiment; the first failure in
    // (algorithm, replication) order is reported.
    let mut results = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        results.push(outcome?);
    }

    let oracle = space.oracle_best().ok();
    let mut algorithms = Vec::with_capacity(spec.algorithms.len());
    for (algo_idx, algo) in spec.algorithms.iter().enumerate() {
        let runs = &results[algo_idx * spec.replications as usize
            ..(algo_idx + 1) * spec.replications as usize];
        algorithms.push(aggregate(space, algo.name(), runs, oracle.as_ref()));
    }

    Ok(ExperimentSummary {
        base_seed: spec.base_seed,
        replications: spec.replications,
        algorithms,
    })
}

#[cfg(feature = "parallel")]
fn execute<J: Sync, R: Send>(
    jobs: &[J],
    workers: usize,
    run_one: impl Fn(&J) -> R + Sync,
) -> Vec<R> {
    use rayon::prelude::*;
    if workers <= 1 {
        return jobs.iter().map(run_one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("worker pool");
    pool.install(|| jobs.par_iter().map(run_one).collect())
}

#[cfg(not(feature = "parallel"))]
fn execute<J: Sync, R: Send>(
    jobs: &[J],
    _workers: usize,
    run_one: impl Fn(&J) -> R + Sync,
) -> Vec<R> {
    jobs.iter().map(run_one).collect()
}

fn aggregate<S: SearchSpace>(
    space: &S,
    algorithm: &'static str,
    runs: &[RunResult],
    oracle: Option<&(S::Config, f64)>,
) -> AlgoMetrics {
    let reps: Vec<RepMetrics> = runs
        .iter()
        .map(|run| {
            let true_accuracy = serde_json::from_value::<S::Config>(run.selected_config.clone())
                .ok()
                .and_then(|config| space.true_value(&config));
            let misidentified = match (true_accuracy, oracle) {
                (Some(acc), Some(&(_, best))) => Some(acc < best),
                _ => None,
            };
            RepMetrics {
                seed: run.seed,
                tested_models: run.tested_models,
                consumed: run.consumed,
                selected_mean: run.selected_mean,
                true_accuracy,
                misidentified,
            }
        })
        .collect();

    let horizon = runs.iter().map(|r| r.budget).max().unwrap_or(0);
    let mut incumbent_mean = Vec::with_capacity(horizon as usize);
    for step in 1..=horizon {
        let mut total = 0.0;
        for run in runs {
            // Before a run's first reward the curve is empty; that cannot
            // happen for step >= 1 since every run starts with a sub-train.
            total += run.incumbent_at(step).unwrap_or(0.0);
        }
        incumbent_mean.push(total / runs.len() as f64);
    }

    let trues: Vec<f64> = reps.iter().filter_map(|r| r.true_accuracy).collect();
    let misided: Vec<bool> = reps.iter().filter_map(|r| r.misidentified).collect();
    AlgoMetrics {
        algorithm,
        tested_models: Stat::from_values(
            &reps.iter().map(|r| r.tested_models as f64).collect::<Vec<_>>(),
        ),
        final_observed: Stat::from_values(
            &reps.iter().map(|r| r.selected_mean).collect::<Vec<_>>(),
        ),
        final_true: (trues.len() == reps.len()).then(|| Stat::from_values(&trues)),
        misidentification_rate: (misided.len() == reps.len()).then(|| {
            misided.iter().filter(|&&m| m).count() as f64 / misided.len() as f64
        }),
        subtrains: Stat::from_values(&reps.iter().map(|r| r.consumed as f64).collect::<Vec<_>>()),
        incumbent_mean,
        reps,
    }
}

/// Write the summary table and one incumbent-curve series per algorithm.
pub fn write_outputs(summary: &ExperimentSummary, out_dir: &Path) -> Result<(), HarnessError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| HarnessError::Io {
            path: path.clone(),
            source,
        }
    };

    let table_path = out_dir.join("summary.tsv");
    fs::write(&table_path, summary_table(summary)).map_err(io_err(&table_path))?;

    let curves = out_dir.join("curves");
    fs::create_dir_all(&curves).map_err(io_err(&curves))?;
    for algo in &summary.algorithms {
        let mut series = String::from("subtrains\tbest_accuracy_mean\n");
        for (i, value) in algo.incumbent_mean.iter().enumerate() {
            series.push_str(&format!("{}\t{}\n", i + 1, value));
        }
        let path = curves.join(format!("{}.tsv", algo.algorithm));
        fs::write(&path, series).map_err(io_err(&path))?;
    }
    Ok(())
}

/// The summary as tab-separated text, one row per algorithm.
pub fn summary_table(summary: &ExperimentSummary) -> String {
    let mut out = String::from(
        "algorithm\ttested_models_mean\tfinal_true_mean\tfinal_true_sd\t\
         final_observed_mean\tfinal_observed_sd\tmisidentification_rate\tsubtrains_mean\n",
    );
    let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
    for algo in &summary.algorithms {
        out.push_str(&format!(
            "{}\t{:.1}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{:.1}\n",
            algo.algorithm,
            algo.tested_models.mean,
            opt(algo.final_true.map(|s| s.mean)),
            opt(algo.final_true.map(|s| s.sd)),
            algo.final_observed.mean,
            algo.final_observed.sd,
            opt(algo.misidentification_rate),
            algo.subtrains.mean,
        ));
    }
    out
}

/// Metric compared across paired replications.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    TrueAccuracy,
    ObservedMean,
    TestedModels,
}

impl Metric {
    fn of(self, rep: &RepMetrics) -> Option<f64> {
        match self {
            Metric::TrueAccuracy => rep.true_accuracy,
            Metric::ObservedMean => Some(rep.selected_mean),
            Metric::TestedModels => Some(rep.tested_models as f64),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::TrueAccuracy => "true_accuracy",
            Metric::ObservedMean => "observed_mean",
            Metric::TestedModels => "tested_models",
        })
    }
}

/// Paired per-replication comparison of two algorithms on one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub metric: Metric,
    pub algorithm_a: &'static str,
    pub algorithm_b: &'static str,
    pub pairs: u32,
    pub wins_a: u32,
    pub wins_b: u32,
    pub ties: u32,
    pub mean_diff: f64,
    /// Two-sided exact sign-test p-value (ties dropped).
    pub p_value: f64,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} vs {} on {}: mean diff {:+.6}, {}–{} wins ({} ties), sign-test p = {:.3e}",
            self.algorithm_a,
            self.algorithm_b,
            self.metric,
            self.mean_diff,
            self.wins_a,
            self.wins_b,
            self.ties,
            self.p_value,
        )
    }
}

pub fn compare(
    a: &AlgoMetrics,
    b: &AlgoMetrics,
    metric: Metric,
) -> Result<Comparison, HarnessError> {
    if a.reps.len() != b.reps.len() {
        return Err(HarnessError::InvalidComparison(format!(
            "replication counts differ: {} vs {}",
            a.reps.len(),
            b.reps.len()
        )));
    }
    let mut wins_a = 0;
    let mut wins_b = 0;
    let mut ties = 0;
    let mut diff_sum = 0.0;
    for (ra, rb) in a.reps.iter().zip(&b.reps) {
        if ra.seed != rb.seed {
            return Err(HarnessError::InvalidComparison(format!(
                "seeds are not paired: {} vs {}",
                ra.seed, rb.seed
            )));
        }
        let (va, vb) = match (metric.of(ra), metric.of(rb)) {
            (Some(va), Some(vb)) => (va, vb),
            _ => {
                return Err(HarnessError::InvalidComparison(format!(
                    "metric {metric} unavailable for some replications"
                )))
            }
        };
        diff_sum += va - vb;
        if va > vb {
            wins_a += 1;
        } else if vb > va {
            wins_b += 1;
        } else {
            ties += 1;
        }
    }
    Ok(Comparison {
        metric,
        algorithm_a: a.algorithm,
        algorithm_b: b.algorithm,
        pairs: a.reps.len() as u32,
        wins_a,
        wins_b,
        ties,
        mean_diff: diff_sum / a.reps.len() as f64,
        p_value: sign_test_p(wins_a, wins_b),
    })
}

/// Exact two-sided sign test: with `n = wins_a + wins_b` untied pairs and
/// `m = max(wins_a, wins_b)`, `p = min(1, 2 * P(Binomial(n, 1/2) >= m))`.
/// No untied pairs gives p = 1.
pub fn sign_test_p(wins_a: u32, wins_b: u32) -> f64 {
    let n = wins_a + wins_b;
    if n == 0 {
        return 1.0;
    }
    let m = wins_a.max(wins_b);
    let mut tail = 0.0f64;
    for k in m..=n {
        tail += exp2_log_choose(n, k);
    }
    (2.0 * tail).min(1.0)
}

/// `C(n, k) / 2^n` computed through log2 to stay in range.
fn exp2_log_choose(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut log2 = 0.0f64;
    for j in 1..=k {
        log2 += f64::from(n - k + j).log2() - f64::from(j).log2();
    }
    (log2 - f64::from(n)).exp2()
}
