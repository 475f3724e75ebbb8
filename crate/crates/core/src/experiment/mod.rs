//! Repeated pool-then-split trials, aggregation and CSV reports.
//!
//! Trial `t` draws its pooled dataset from seed
//! `derive_seed(master, [DOMAIN_TRIAL, t])` and its calibration/test
//! permutation from `substream(that, [DOMAIN_SPLIT])`. Sweeps reuse the
//! master seed for every axis value, so neighbouring values see the same
//! trial seeds.

mod config;
mod report;

pub use config::{ExperimentConfig, GraphSource};
pub use report::{write_summary_csv, write_trials_csv, write_detail_csv};

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use thiserror::Error;

use crate::conformal::{
    calibration_scores, finite_sample_quantile, required_hits, shrink, ConformalError, ScoreKind, ScoreProfile,
};
use crate::diffusion::{sample_dataset, DiffusionError, InfectionDist, LabeledSample, UniformRange};
use crate::estimator::{EstimatorError, ProbVector, SourceEstimator};
use crate::graph::{Graph, GraphError};
use crate::rng::{derive_seed, substream, DOMAIN_SPLIT, DOMAIN_TRIAL};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
}

/// One `(estimator, score, alpha, beta)` combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub estimator: String,
    pub score: ScoreKind,
    pub alpha: f64,
    pub beta: f64,
}

/// Per-sample outcome, kept only when a detail dump is requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOutcome {
    pub sample_id: u64,
    pub set_size: usize,
    pub hits: usize,
    pub n_sources: usize,
    pub included: bool,
}

/// Result of one cell in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTrial {
    pub q_hat: f64,
    pub inclusion_rate: f64,
    pub mean_set_size: f64,
    /// Wall time of calibration plus prediction; `None` unless timings are recorded.
    pub runtime_s: Option<f64>,
    pub details: Vec<SampleOutcome>,
}

/// Mean and standard error over trials; `stderr` is `None` for a single trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: Option<f64>,
}

impl MeanStderr {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let stderr = (sorted.len() > 1).then(|| {
            let var = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        });
        Self { mean, stderr }
    }

    /// `mean - k * stderr`, with a missing stderr counting as 0.
    pub fn lower(&self, k: f64) -> f64 {
        self.mean - k * self.stderr.unwrap_or(0.0)
    }

    pub fn upper(&self, k: f64) -> f64 {
        self.mean + k * self.stderr.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub inclusion: MeanStderr,
    pub set_size: MeanStderr,
    pub runtime_s: Option<f64>,
    /// Raw per-trial values, in trial order.
    pub trials: Vec<CellTrial>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    /// Canonical config text, hashed into report headers.
    pub config: String,
    pub seed: u64,
    pub n_trials: usize,
    pub cells: Vec<CellSummary>,
}

impl TrialReport {
    pub fn find(&self, estimator: &str, score: ScoreKind, alpha: f64, beta: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| {
            c.cell.estimator == estimator && c.cell.score == score && c.cell.alpha == alpha && c.cell.beta == beta
        })
    }
}

/// A graph plus built estimators, shared by all trials.
pub struct ExperimentContext {
    pub cfg: ExperimentConfig,
    pub graph: Arc<Graph>,
    pub estimators: Vec<Box<dyn SourceEstimator>>,
}

impl ExperimentContext {
    pub fn new(cfg: ExperimentConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let graph = Arc::new(cfg.graph.build()?);
        cfg.dataset.validate(graph.n_nodes())?;
        let estimators = cfg
            .estimators
            .iter()
            .map(|spec| spec.build(Arc::clone(&graph)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { cfg, graph, estimators })
    }

    /// Cells in report order: estimator, score, beta, alpha as listed in the config.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for est in &self.estimators {
            for &score in &self.cfg.scores {
                for &beta in &self.cfg.betas {
                    for &alpha in &self.cfg.alphas {
                        cells.push(Cell {
                            estimator: est.name(),
                            score,
                            alpha,
                            beta,
                        });
                    }
                }
            }
        }
        cells
    }

    /// Pool seed and split seed of trial `t`.
    pub fn trial_seeds(&self, t: usize) -> (u64, u64) {
        let pool = derive_seed(self.cfg.seed, &[DOMAIN_TRIAL, t as u64]);
        (pool, derive_seed(pool, &[DOMAIN_SPLIT]))
    }

    /// Draws the pool for `pool_seed`, splits it by `split_seed` and
    /// evaluates every cell. Results are in [`cells`](Self::cells) order.
    pub fn run_trial(&self, pool_seed: u64, split_seed: u64, keep_details: bool) -> Result<Vec<CellTrial>, ExperimentError> {
        let cfg = &self.cfg;
        let pool = sample_dataset(&self.graph, &cfg.dataset, cfg.n_cal + cfg.n_test, pool_seed)?;
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.shuffle(&mut substream(split_seed, &[]));
        let (cal_idx, test_idx) = order.split_at(cfg.n_cal);
        let cal: Vec<&LabeledSample> = cal_idx.iter().map(|&i| &pool[i]).collect();
        let test: Vec<&LabeledSample> = test_idx.iter().map(|&i| &pool[i]).collect();

        let mut out = Vec::new();
        for est in &self.estimators {
            let estimate = |samples: &[&LabeledSample]| -> Result<Vec<(ProbVector, Vec<usize>)>, ExperimentError> {
                samples
                    .iter()
                    .map(|s| Ok((est.estimate(s)?, s.sources.clone())))
                    .collect()
            };
            let cal_pairs = estimate(&cal)?;
            let test_pairs = estimate(&test)?;
            for &score in &cfg.scores {
                let started = Instant::now();
                let profiles: Vec<ScoreProfile> = test_pairs.par_iter().map(|(pi, _)| ScoreProfile::new(score, pi)).collect();
                let profile_time = started.elapsed().as_secs_f64();
                for &beta in &cfg.betas {
                    let started = Instant::now();
                    let scores = calibration_scores(&cal_pairs, score, beta)?;
                    let cal_time = started.elapsed().as_secs_f64();
                    for &alpha in &cfg.alphas {
                        let started = Instant::now();
                        let q_hat = finite_sample_quantile(&scores, alpha)?;
                        let outcomes = test_outcomes(&test, &test_pairs, &profiles, q_hat, beta)?;
                        let elapsed = started.elapsed().as_secs_f64() + cal_time + profile_time;
                        let n = outcomes.len() as f64;
                        out.push(CellTrial {
                            q_hat,
                            inclusion_rate: outcomes.iter().filter(|o| o.included).count() as f64 / n,
                            mean_set_size: outcomes.iter().map(|o| o.set_size as f64).sum::<f64>() / n,
                            runtime_s: cfg.record_timings.then_some(elapsed),
                            details: if keep_details { outcomes } else { Vec::new() },
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

fn test_outcomes(
    test: &[&LabeledSample],
    pairs: &[(ProbVector, Vec<usize>)],
    profiles: &[ScoreProfile],
    q_hat: f64,
    beta: f64,
) -> Result<Vec<SampleOutcome>, ExperimentError> {
    test.iter()
        .zip(pairs)
        .zip(profiles)
        .map(|((sample, (pi, y)), profile)| {
            let set = if q_hat == f64::INFINITY {
                (0..pi.len()).collect()
            } else {
                profile.select(q_hat)
            };
            let hits = y.iter().filter(|v| set.binary_search(v).is_ok()).count();
            // shrink validates the labels against pi
            shrink(pi, y, beta)?;
            Ok(SampleOutcome {
                sample_id: sample.id,
                set_size: set.len(),
                hits,
                n_sources: y.len(),
                included: hits >= required_hits(beta, y.len()),
            })
        })
        .collect()
}

fn summarize(ctx: &ExperimentContext, per_trial: Vec<Vec<CellTrial>>) -> TrialReport {
    let cells = ctx.cells();
    let mut by_cell: Vec<Vec<CellTrial>> = vec![Vec::with_capacity(per_trial.len()); cells.len()];
    for trial in per_trial {
        for (slot, result) in by_cell.iter_mut().zip(trial) {
            slot.push(result);
        }
    }
    let cells = cells
        .into_iter()
        .zip(by_cell)
        .map(|(cell, trials)| {
            let inclusion: Vec<f64> = trials.iter().map(|t| t.inclusion_rate).collect();
            let sizes: Vec<f64> = trials.iter().map(|t| t.mean_set_size).collect();
            let runtime_s = ctx.cfg.record_timings.then(|| {
                let times: Vec<f64> = trials.iter().filter_map(|t| t.runtime_s).collect();
                MeanStderr::of(&times).mean
            });
            CellSummary {
                cell,
                inclusion: MeanStderr::of(&inclusion),
                set_size: MeanStderr::of(&sizes),
                runtime_s,
                trials,
            }
        })
        .collect();
    TrialReport {
        config: ctx.cfg.canonical(),
        seed: ctx.cfg.seed,
        n_trials: ctx.cfg.n_trials,
        cells,
    }
}

/// Runs `n_trials` trials (in parallel) and aggregates them per cell.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TrialReport, ExperimentError> {
    run_experiment_with(cfg, false)
}

/// As [`run_experiment`], optionally keeping per-sample outcomes for a detail dump.
pub fn run_experiment_with(cfg: &ExperimentConfig, keep_details: bool) -> Result<TrialReport, ExperimentError> {
    let ctx = ExperimentContext::new(cfg.clone())?;
    let per_trial = (0..cfg.n_trials)
        .into_par_iter()
        .map(|t| {
            let (pool, split) = ctx.trial_seeds(t);
            ctx.run_trial(pool, split, keep_details)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(&ctx, per_trial))
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Alpha(Vec<f64>),
    Beta(Vec<f64>),
    R0(Vec<UniformRange<f64>>),
    NSources(Vec<UniformRange<usize>>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Alpha(_) => "alpha",
            Self::Beta(_) => "beta",
            Self::R0(_) => "r0",
            Self::NSources(_) => "n_sources",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Alpha(v) | Self::Beta(v) => v.len(),
            Self::R0(v) => v.len(),
            Self::NSources(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parses `alpha`/`beta` values (`0.1,0.3`) or ranges for `r0` and
    /// `n_sources` (`1-15,11-25`; a bare number is a point range).
    pub fn parse(axis: &str, values: &str) -> Result<Self, ExperimentError> {
        let items: Vec<&str> = values.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        let bad = |item: &str| ExperimentError::Config(format!("invalid {axis} value {item:?}"));
        let num = |item: &str| item.parse::<f64>().map_err(|_| bad(item));
        fn range<T: std::str::FromStr + Copy>(item: &str) -> Option<UniformRange<T>> {
            match item.split_once('-') {
                Some((lo, hi)) => Some(UniformRange {
                    lo: lo.trim().parse().ok()?,
                    hi: hi.trim().parse().ok()?,
                }),
                None => item.parse().ok().map(UniformRange::point),
            }
        }
        let axis = match axis {
            "alpha" => Self::Alpha(items.iter().map(|s| num(s)).collect::<Result<_, _>>()?),
            "beta" => Self::Beta(items.iter().map(|s| num(s)).collect::<Result<_, _>>()?),
            "r0" => Self::R0(items.iter().map(|s| range(s).ok_or_else(|| bad(s))).collect::<Result<_, _>>()?),
            "n_sources" | "n-sources" => {
                Self::NSources(items.iter().map(|s| range(s).ok_or_else(|| bad(s))).collect::<Result<_, _>>()?)
            }
            other => {
                return Err(ExperimentError::Config(format!(
                    "unknown sweep axis {other:?}; expected alpha, beta, r0 or n_sources"
                )))
            }
        };
        if axis.is_empty() {
            return Err(ExperimentError::Config(format!("sweep axis {} has no values", axis.name())));
        }
        Ok(axis)
    }

    /// The config for each axis value, with its label.
    pub fn configs(&self, base: &ExperimentConfig) -> Vec<(String, ExperimentConfig)> {
        let with = |label: String, edit: &dyn Fn(&mut ExperimentConfig)| {
            let mut cfg = base.clone();
            edit(&mut cfg);
            (label, cfg)
        };
        match self {
            Self::Alpha(values) => values.iter().map(|&a| with(a.to_string(), &|c| c.alphas = vec![a])).collect(),
            Self::Beta(values) => values.iter().map(|&b| with(b.to_string(), &|c| c.betas = vec![b])).collect(),
            Self::R0(ranges) => ranges
                .iter()
                .map(|&r| with(format!("{}-{}", r.lo, r.hi), &|c| c.dataset.infection = InfectionDist::R0(r)))
                .collect(),
            Self::NSources(ranges) => ranges
                .iter()
                .map(|&r| with(format!("{}-{}", r.lo, r.hi), &|c| c.dataset.n_sources = r))
                .collect(),
        }
    }
}

/// One report per axis value, all under the base config's master seed.
pub fn sweep(base: &ExperimentConfig, axis: &SweepAxis) -> Result<Vec<(String, TrialReport)>, ExperimentError> {
    if axis.is_empty() {
        return Err(ExperimentError::Config(format!("sweep axis {} has no values", axis.name())));
    }
    axis.configs(base)
        .into_iter()
        .map(|(label, cfg)| Ok((label, run_experiment(&cfg)?)))
        .collect()
}

/// Mean set size per axis value for each (estimator, score), and whether it
/// increases along the axis. Informational only.
pub fn set_size_trends(reports: &[(String, TrialReport)]) -> Vec<String> {
    let Some((_, first)) = reports.first() else {
        return Vec::new();
    };
    let mut lines = Vec::new();
    let mut seen: Vec<(String, ScoreKind)> = Vec::new();
    for summary in &first.cells {
        let key = (summary.cell.estimator.clone(), summary.cell.score);
        if seen.contains(&key) {
            continue;
        }
        let means: Vec<f64> = reports
            .iter()
            .map(|(_, r)| {
                let sizes: Vec<f64> = r
                    .cells
                    .iter()
                    .filter(|c| c.cell.estimator == key.0 && c.cell.score == key.1)
                    .map(|c| c.set_size.mean)
                    .collect();
                sizes.iter().sum::<f64>() / sizes.len().max(1) as f64
            })
            .collect();
        let increasing = means.windows(2).all(|w| w[0] <= w[1]);
        let shown: Vec<String> = reports
            .iter()
            .zip(&means)
            .map(|((label, _), m)| format!("{label}:{m:.3}"))
            .collect();
        lines.push(format!(
            "{} {}: mean set size {} ({})",
            key.0,
            key.1,
            shown.join(" "),
            if increasing { "non-decreasing" } else { "not monotone" }
        ));
        seen.push(key);
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::EstimatorSpec;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n_cal: 60,
            n_test: 30,
            n_trials: 4,
            alphas: vec![0.1, 0.5],
            betas: vec![0.3],
            graph: GraphSource::Model {
                model: "ba:40:2".into(),
                seed: 3,
            },
            estimators: vec![EstimatorSpec::Heuristic, EstimatorSpec::Oracle { noise: 1.0, seed: 1 }],
            ..ExperimentConfig::desk_scale()
        }
    }

    #[test]
    fn mean_stderr() {
        let m = MeanStderr::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((m.stderr.unwrap() - sd / 2.0).abs() < 1e-15);
        assert_eq!(MeanStderr::of(&[0.7]).stderr, None);
        assert_eq!(MeanStderr::of(&[0.7]).lower(3.0), 0.7);
    }

    #[test]
    fn report_shape_and_ranges() {
        let cfg = small();
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.cells.len(), 2 * 3 * 2);
        for c in &report.cells {
            assert_eq!(c.trials.len(), 4);
            assert!((0.0..=1.0).contains(&c.inclusion.mean));
            assert!(c.set_size.mean <= 40.0);
            assert!(c.runtime_s.is_none());
        }
    }

    #[test]
    fn larger_alpha_gives_smaller_sets() {
        let report = run_experiment(&small()).unwrap();
        for est in ["heuristic", "oracle(noise=1)"] {
            for score in ScoreKind::ALL {
                let tight = report.find(est, score, 0.1, 0.3).unwrap();
                let loose = report.find(est, score, 0.5, 0.3).unwrap();
                for (a, b) in tight.trials.iter().zip(&loose.trials) {
                    assert!(b.mean_set_size <= a.mean_set_size);
                    assert!(b.q_hat <= a.q_hat);
                }
            }
        }
    }

    #[test]
    fn single_trial_has_no_stderr() {
        let cfg = ExperimentConfig { n_trials: 1, ..small() };
        let report = run_experiment(&cfg).unwrap();
        assert!(report.cells.iter().all(|c| c.inclusion.stderr.is_none() && c.set_size.stderr.is_none()));
    }

    #[test]
    fn deterministic_under_seed() {
        let a = run_experiment(&small()).unwrap();
        let b = run_experiment(&small()).unwrap();
        assert_eq!(a, b);
        let c = run_experiment(&ExperimentConfig { seed: 99, ..small() }).unwrap();
        assert_ne!(a.cells, c.cells);
    }

    #[test]
    fn single_value_sweep_matches_run() {
        let cfg = ExperimentConfig { alphas: vec![0.1], ..small() };
        let reports = sweep(&cfg, &SweepAxis::Alpha(vec![0.1])).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].1, run_experiment(&cfg).unwrap());
        assert!(sweep(&cfg, &SweepAxis::Beta(vec![])).is_err());
    }

    #[test]
    fn parses_axes() {
        assert_eq!(SweepAxis::parse("beta", "0.1,0.3").unwrap(), SweepAxis::Beta(vec![0.1, 0.3]));
        assert_eq!(
            SweepAxis::parse("r0", "1-15, 11-25").unwrap(),
            SweepAxis::R0(vec![UniformRange { lo: 1.0, hi: 15.0 }, UniformRange { lo: 11.0, hi: 25.0 }])
        );
        assert_eq!(
            SweepAxis::parse("n_sources", "3").unwrap(),
            SweepAxis::NSources(vec![UniformRange::point(3)])
        );
        assert!(SweepAxis::parse("gamma", "1").is_err());
        assert!(SweepAxis::parse("alpha", "").is_err());
        assert!(SweepAxis::parse("alpha", "x").is_err());
    }
}
