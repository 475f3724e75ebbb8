//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when arguments or input files are invalid,
//! 2 when a run fails after its inputs were accepted.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::conformal::check::{
    compare_crc_with_min, prefix_matches_bruteforce, random_crc_instance, random_prob_vector, random_threshold,
};
use crate::conformal::{
    calibrate, evaluate_set, predict, read_model, write_model, ModelFile, PredictionSet, ScoreKind, CQIOC_MAX_NODES,
};
use crate::conformal::NominalLevels;
use crate::diffusion::{
    read_dataset, read_dataset_binary, sample_dataset, write_dataset, write_dataset_binary, DatasetConfig, DatasetHeader,
    InfectionDist, LabeledSample, T1Rule, UniformRange, DEFAULT_HORIZON, DEFAULT_WINDOW,
};
use crate::estimator::{EstimatorSpec, ProbVector, SourceEstimator};
use crate::experiment::{
    set_size_trends, sweep, write_detail_csv, write_summary_csv, write_trials_csv, ExperimentConfig, SweepAxis,
};
use crate::graph::{generate_graph, load_edge_list, Graph, GraphModel};
use crate::provenance::Provenance;
use crate::rng::substream;

#[derive(Debug, Parser)]
#[command(name = "setcp", version, about = "Conformal prediction sets for diffusion source detection")]
pub struct Cli {
    /// Master seed; every random draw derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate labeled diffusion samples and write a dataset file.
    Simulate(SimulateArgs),
    /// Calibrate a threshold on a labeled dataset and write a model file.
    Calibrate(CalibrateArgs),
    /// Predict source sets for every sample of a dataset.
    Predict(PredictArgs),
    /// Score prediction sets against the true sources.
    Evaluate(EvaluateArgs),
    /// Run repeated calibrate/test trials over one varied parameter.
    Sweep(SweepArgs),
    /// Cross-check prefix sets against exhaustive and risk-control constructions.
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// complete:N, er:N:P, ba:N:M or file:PATH (edge list). Generated graphs use
    /// --seed unless given as MODEL@SEED.
    #[arg(long)]
    pub graph: String,
    /// Infection probability per contact, a value or LO-HI range.
    #[arg(long, conflicts_with = "r0", required_unless_present = "r0")]
    pub sigma_inf: Option<String>,
    /// Reproduction number, a value or LO-HI range; sets sigma_inf from the spectral radius.
    #[arg(long)]
    pub r0: Option<String>,
    /// Recovery probability per step, a value or LO-HI range (0 gives SI).
    #[arg(long, default_value = "0.1-0.4")]
    pub sigma_rec: String,
    /// Number of sources per sample, a value or LO-HI range.
    #[arg(long, default_value = "1-15")]
    pub sources: String,
    /// Number of samples.
    #[arg(long)]
    pub samples: usize,
    /// First observed step, or "protocol" (2 for single-source or slow spread, else 1).
    #[arg(long, default_value = "protocol")]
    pub t1: String,
    /// Snapshots per sample.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Steps between snapshots.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Simulated steps.
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: usize,
    /// Output dataset; a .bin extension selects the binary format.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    /// heuristic, mc:K[@SEED], oracle:NOISE[@SEED] or file:PATH.
    #[arg(long)]
    pub estimator: Option<String>,
    /// Graph for graph-based estimators; defaults to the one named in the dataset header.
    #[arg(long)]
    pub graph: Option<String>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Labeled calibration dataset.
    #[arg(long)]
    pub data: PathBuf,
    /// pre, rec or min.
    #[arg(long)]
    pub score: String,
    /// Miscoverage level in (0, 1).
    #[arg(long)]
    pub alpha: f64,
    /// Tolerated missed-source fraction in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[command(flatten)]
    pub est: EstimatorArgs,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model file written by calibrate.
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset of samples to predict on.
    #[arg(long, alias = "sample", alias = "samples")]
    pub data: PathBuf,
    #[command(flatten)]
    pub est: EstimatorArgs,
    /// Output set file (JSON lines); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Set file written by predict.
    #[arg(long)]
    pub sets: PathBuf,
    /// Labeled dataset the sets were predicted for.
    #[arg(long)]
    pub data: PathBuf,
    /// Recall tolerance; defaults to the beta recorded in the set file.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Experiment config (TOML); the desk-scale preset when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// alpha, beta, r0 or n_sources.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated values; ranges as LO-HI for r0 and n_sources.
    #[arg(long)]
    pub values: String,
    /// Override the number of trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Override the calibration set size.
    #[arg(long)]
    pub n_cal: Option<usize>,
    /// Override the test set size.
    #[arg(long)]
    pub n_test: Option<usize>,
    /// Override the estimator list (repeatable).
    #[arg(long)]
    pub estimator: Vec<String>,
    /// Fill the runtime column.
    #[arg(long)]
    pub timings: bool,
    /// Also write per-sample outcomes.
    #[arg(long)]
    pub detail: bool,
    /// Directory for the CSV reports.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    /// Nodes per instance (at most 16).
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Random instances per suite.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or input files; exit code 1.
    Invalid(String),
    /// Failure after inputs were accepted; exit code 2.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Invalid(m) | Self::Runtime(m) => f.write_str(m),
        }
    }
}

trait Classify<T> {
    fn invalid(self) -> Result<T, CliError>;
    fn runtime(self) -> Result<T, CliError>;
}

impl<T, E: std::fmt::Display> Classify<T> for Result<T, E> {
    fn invalid(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Invalid(e.to_string()))
    }

    fn runtime(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Runtime(e.to_string()))
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Invalid("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(threads);
    }
    let pool = pool.build().runtime()?;
    let seed = cli.seed;
    pool.install(|| match cli.command {
        Command::Simulate(a) => simulate_cmd(a, seed),
        Command::Calibrate(a) => calibrate_cmd(a, seed),
        Command::Predict(a) => predict_cmd(a, seed),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Sweep(a) => sweep_cmd(a, seed),
        Command::OracleCheck(a) => oracle_check_cmd(a, seed),
    })
}

fn parse_range<T>(flag: &str, s: &str) -> Result<UniformRange<T>, CliError>
where
    T: std::str::FromStr + Copy,
{
    let bad = || CliError::Invalid(format!("--{flag}: expected a value or LO-HI range, got {s:?}"));
    match s.split_once('-') {
        Some((lo, hi)) if !lo.is_empty() => Ok(UniformRange {
            lo: lo.trim().parse().map_err(|_| bad())?,
            hi: hi.trim().parse().map_err(|_| bad())?,
        }),
        _ => Ok(UniformRange::point(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// Loads `complete:N`, `er:N:P`, `ba:N:M` or `file:PATH`. Generated graphs use
/// `seed` unless the spec pins one with an `@SEED` suffix.
pub fn load_graph(spec: &str, seed: u64) -> Result<Graph, CliError> {
    if let Some(path) = spec.strip_prefix("file:") {
        let load = load_edge_list(path).invalid()?;
        if load.dropped_lines > 0 {
            eprintln!("note: dropped {} self-loop or duplicate lines from {path}", load.dropped_lines);
        }
        return Ok(load.graph);
    }
    let (spec, seed) = match spec.split_once('@') {
        Some((m, s)) => (m, s.parse().map_err(|_| CliError::Invalid(format!("--graph: bad seed {s:?}")))?),
        None => (spec, seed),
    };
    let model: GraphModel = spec.parse().map_err(|e| CliError::Invalid(format!("--graph: {e}")))?;
    generate_graph(model, seed).invalid()
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

fn read_samples(path: &Path) -> Result<(DatasetHeader, Vec<LabeledSample>), CliError> {
    if is_binary(path) {
        read_dataset_binary(path).invalid()
    } else {
        read_dataset(path).invalid()
    }
}

fn simulate_cmd(a: SimulateArgs, seed: u64) -> Result<(), CliError> {
    let g = load_graph(&a.graph, seed)?;
    let infection = match (&a.sigma_inf, &a.r0) {
        (Some(s), None) => InfectionDist::Rate(parse_range("sigma-inf", s)?),
        (None, Some(r)) => InfectionDist::R0(parse_range("r0", r)?),
        _ => return Err(CliError::Invalid("give exactly one of --sigma-inf and --r0".into())),
    };
    let t1 = if a.t1 == "protocol" {
        T1Rule::Protocol
    } else {
        T1Rule::Fixed(a.t1.parse().map_err(|_| CliError::Invalid(format!("--t1: expected a step or \"protocol\", got {:?}", a.t1)))?)
    };
    let cfg = DatasetConfig {
        infection,
        sigma_rec: parse_range("sigma-rec", &a.sigma_rec)?,
        n_sources: parse_range("sources", &a.sources)?,
        t1,
        window: a.window,
        stride: a.stride,
        horizon: a.horizon,
    };
    cfg.validate(g.n_nodes()).invalid()?;
    if a.samples == 0 {
        return Err(CliError::Invalid("--samples must be at least 1".into()));
    }
    let samples = sample_dataset(&g, &cfg, a.samples, seed).runtime()?;
    let described = format!("graph={} config={cfg:?} samples={}", a.graph, a.samples);
    let header = DatasetHeader {
        dataset: Provenance::new(&described, seed),
        n_nodes: g.n_nodes(),
        graph: Some(a.graph.clone()),
    };
    if is_binary(&a.out) {
        write_dataset_binary(&a.out, &header, &samples).runtime()?;
    } else {
        write_dataset(&a.out, &header, &samples).runtime()?;
    }
    eprintln!("wrote {} samples on {} nodes to {}", samples.len(), g.n_nodes(), a.out.display());
    Ok(())
}

fn build_estimator(
    est: &EstimatorArgs,
    fallback: Option<&str>,
    header: &DatasetHeader,
    seed: u64,
) -> Result<(EstimatorSpec, Box<dyn SourceEstimator>), CliError> {
    let text = est.estimator.as_deref().or(fallback).unwrap_or("heuristic");
    let mut spec: EstimatorSpec = text.parse().map_err(|e| CliError::Invalid(format!("--estimator: {e}")))?;
    if est.estimator.is_some() && !text.contains('@') {
        spec = spec.with_seed(seed);
    }
    let graph = match (&est.graph, &header.graph, &spec) {
        (_, _, EstimatorSpec::Oracle { .. } | EstimatorSpec::File { .. }) => Graph::from_edges(header.n_nodes, [])
            .invalid()?
            .0,
        (Some(g), _, _) | (None, Some(g), _) => load_graph(g, header.dataset.seed)?,
        (None, None, _) => return Err(CliError::Invalid("--graph is required: the dataset header names no graph".into())),
    };
    if graph.n_nodes() != header.n_nodes {
        return Err(CliError::Invalid(format!(
            "--graph has {} nodes but the dataset has {}",
            graph.n_nodes(),
            header.n_nodes
        )));
    }
    let built = spec.build(Arc::new(graph)).invalid()?;
    Ok((spec, built))
}

fn estimate_all(est: &dyn SourceEstimator, samples: &[LabeledSample]) -> Result<Vec<ProbVector>, CliError> {
    use rayon::prelude::*;
    samples.par_iter().map(|s| est.estimate(s)).collect::<Result<_, _>>().runtime()
}

fn calibrate_cmd(a: CalibrateArgs, seed: u64) -> Result<(), CliError> {
    let kind: ScoreKind = a.score.parse().map_err(|e| CliError::Invalid(format!("--score: {e}")))?;
    let levels = NominalLevels::new(a.alpha, a.beta).map_err(|e| CliError::Invalid(format!("--alpha/--beta: {e}")))?;
    let (header, samples) = read_samples(&a.data)?;
    if samples.is_empty() {
        return Err(CliError::Invalid(format!("{}: no samples", a.data.display())));
    }
    let (spec, est) = build_estimator(&a.est, None, &header, seed)?;
    let probs = estimate_all(est.as_ref(), &samples)?;
    let pairs: Vec<(ProbVector, Vec<usize>)> = probs.into_iter().zip(samples.iter().map(|s| s.sources.clone())).collect();
    let model = calibrate(&pairs, kind, levels).runtime()?;
    let file = ModelFile::from_model(&model, Some(spec.to_arg()));
    let described = format!("data={} {file:?}", header.dataset.config_hash);
    write_model(&a.out, &Provenance::new(&described, seed), &file).runtime()?;
    eprintln!("q_hat = {} from {} calibration samples", model.q_hat, model.n_cal);
    Ok(())
}

/// First line of a set file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetFileHeader {
    pub sets: Provenance,
    pub score_kind: ScoreKind,
    pub alpha: f64,
    pub beta: f64,
    /// `null` for an infinite threshold.
    pub q_hat: Option<f64>,
    pub estimator: String,
}

/// One prediction per line after the header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetRecord {
    pub id: u64,
    pub nodes: Vec<usize>,
}

fn predict_cmd(a: PredictArgs, seed: u64) -> Result<(), CliError> {
    let file = read_model(&a.model).invalid()?;
    let model = file.to_model().invalid()?;
    let (header, samples) = read_samples(&a.data)?;
    let (spec, est) = build_estimator(&a.est, file.estimator.as_deref(), &header, seed)?;
    let probs = estimate_all(est.as_ref(), &samples)?;
    let sets: Vec<PredictionSet> = probs.iter().map(|pi| predict(&model, pi)).collect();

    let described = format!("model={file:?} data={}", header.dataset.config_hash);
    let set_header = SetFileHeader {
        sets: Provenance::new(&described, seed),
        score_kind: model.score,
        alpha: model.levels.alpha(),
        beta: model.levels.beta(),
        q_hat: model.q_hat.is_finite().then_some(model.q_hat),
        estimator: spec.to_arg(),
    };
    let mut out: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).runtime()?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "{}", serde_json::to_string(&set_header).runtime()?).runtime()?;
    for (sample, set) in samples.iter().zip(sets) {
        let record = SetRecord { id: sample.id, nodes: set.nodes };
        writeln!(out, "{}", serde_json::to_string(&record).runtime()?).runtime()?;
    }
    out.flush().runtime()
}

/// Reads a set file written by `predict`.
pub fn read_set_file(path: &Path) -> Result<(SetFileHeader, Vec<SetRecord>), CliError> {
    let bad = |line: usize, e: &dyn std::fmt::Display| CliError::Invalid(format!("{}: line {line}: {e}", path.display()));
    let reader = BufReader::new(File::open(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?);
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| bad(1, &e))?;
            serde_json::from_str(&line).map_err(|e| bad(1, &e))?
        }
        None => return Err(CliError::Invalid(format!("{}: empty set file", path.display()))),
    };
    let mut records = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| bad(i + 1, &e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| bad(i + 1, &e))?);
    }
    Ok((header, records))
}

/// Aggregate quality of a set file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub n: usize,
    pub inclusion_rate: f64,
    pub mean_set_size: f64,
    pub mean_recall: f64,
    pub mean_precision: f64,
}

pub fn evaluate_files(sets: &Path, data: &Path, beta: Option<f64>) -> Result<Evaluation, CliError> {
    let (header, records) = read_set_file(sets)?;
    let beta = beta.unwrap_or(header.beta);
    NominalLevels::new(0.5, beta).map_err(|e| CliError::Invalid(format!("--beta: {e}")))?;
    let (_, samples) = read_samples(data)?;
    let by_id: std::collections::HashMap<u64, &LabeledSample> = samples.iter().map(|s| (s.id, s)).collect();
    if records.is_empty() {
        return Err(CliError::Invalid(format!("{}: no predictions", sets.display())));
    }
    let (mut included, mut size, mut recall, mut precision) = (0usize, 0.0, 0.0, 0.0);
    for r in &records {
        let sample = by_id
            .get(&r.id)
            .ok_or_else(|| CliError::Invalid(format!("sample {} is not in {}", r.id, data.display())))?;
        let set = PredictionSet {
            nodes: r.nodes.clone(),
            threshold_used: header.q_hat.unwrap_or(f64::INFINITY),
        };
        let e = evaluate_set(&set, &sample.sources, beta).invalid()?;
        included += usize::from(e.included);
        size += set.len() as f64;
        recall += e.recall;
        precision += e.precision;
    }
    let n = records.len() as f64;
    Ok(Evaluation {
        n: records.len(),
        inclusion_rate: included as f64 / n,
        mean_set_size: size / n,
        mean_recall: recall / n,
        mean_precision: precision / n,
    })
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<(), CliError> {
    let e = evaluate_files(&a.sets, &a.data, a.beta)?;
    println!("n={}", e.n);
    println!("inclusion_rate={}", e.inclusion_rate);
    println!("mean_set_size={}", e.mean_set_size);
    println!("mean_recall={}", e.mean_recall);
    println!("mean_precision={}", e.mean_precision);
    Ok(())
}

fn sweep_cmd(a: SweepArgs, seed: u64) -> Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path).invalid()?,
        None => ExperimentConfig {
            seed,
            ..ExperimentConfig::desk_scale()
        },
    };
    if let Some(t) = a.trials {
        cfg.n_trials = t;
    }
    if let Some(n) = a.n_cal {
        cfg.n_cal = n;
    }
    if let Some(n) = a.n_test {
        cfg.n_test = n;
    }
    if !a.estimator.is_empty() {
        cfg.estimators = a
            .estimator
            .iter()
            .map(|s| s.parse().map_err(|e| CliError::Invalid(format!("--estimator: {e}"))))
            .collect::<Result<_, _>>()?;
    }
    cfg.record_timings |= a.timings;
    let axis = SweepAxis::parse(&a.axis, &a.values).invalid()?;
    for (_, c) in axis.configs(&cfg) {
        c.validate().invalid()?;
    }
    std::fs::create_dir_all(&a.out_dir).runtime()?;

    let reports = if a.detail {
        axis.configs(&cfg)
            .into_iter()
            .map(|(label, c)| Ok((label, crate::experiment::run_experiment_with(&c, true)?)))
            .collect::<Result<Vec<_>, crate::experiment::ExperimentError>>()
    } else {
        sweep(&cfg, &axis)
    }
    .runtime()?;
    for (label, report) in &reports {
        let stem = format!("{}_{}", axis.name(), label);
        write_trials_csv(a.out_dir.join(format!("{stem}_trials.csv")), report).runtime()?;
        write_summary_csv(a.out_dir.join(format!("{stem}_summary.csv")), report).runtime()?;
        if a.detail {
            write_detail_csv(a.out_dir.join(format!("{stem}_detail.csv")), report).runtime()?;
        }
        for c in &report.cells {
            println!(
                "{}={} {} {} alpha={} beta={} inclusion={:.4} set_size={:.3}",
                axis.name(),
                label,
                c.cell.estimator,
                c.cell.score,
                c.cell.alpha,
                c.cell.beta,
                c.inclusion.mean,
                c.set_size.mean
            );
        }
    }
    if reports.len() > 1 {
        for line in set_size_trends(&reports) {
            println!("trend: {line}");
        }
    }
    Ok(())
}

/// Outcome of the randomized equivalence suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OracleCheckSummary {
    pub prefix_checks: usize,
    pub prefix_mismatches: usize,
    pub crc_checks: usize,
    pub crc_mismatches: usize,
}

pub fn oracle_check(n: usize, trials: usize, seed: u64) -> Result<OracleCheckSummary, CliError> {
    if n == 0 || n > CQIOC_MAX_NODES {
        return Err(CliError::Invalid(format!("--n must lie in 1..={CQIOC_MAX_NODES}, got {n}")));
    }
    let mut summary = OracleCheckSummary::default();
    let mut rng = substream(seed, &[0]);
    for _ in 0..trials {
        let pi = random_prob_vector(&mut rng, n);
        for kind in ScoreKind::ALL {
            let q = random_threshold(&mut rng, kind, &pi).runtime()?;
            summary.prefix_checks += 1;
            if !prefix_matches_bruteforce(&pi, q, kind).runtime()? {
                summary.prefix_mismatches += 1;
            }
        }
    }
    let mut rng = substream(seed, &[1]);
    for _ in 0..trials {
        let (cal, test, levels) = random_crc_instance(&mut rng, n).runtime()?;
        let cmp = compare_crc_with_min(&cal, &test, levels).runtime()?;
        summary.crc_checks += 1;
        if !cmp.sets_equal || cmp.gap > 1e-12 {
            summary.crc_mismatches += 1;
        }
    }
    Ok(summary)
}

fn oracle_check_cmd(a: OracleCheckArgs, seed: u64) -> Result<(), CliError> {
    let s = oracle_check(a.n, a.trials, seed)?;
    println!("prefix vs exhaustive: {} checks, {} mismatches", s.prefix_checks, s.prefix_mismatches);
    println!("risk control vs min score: {} checks, {} mismatches", s.crc_checks, s.crc_mismatches);
    if s.prefix_mismatches + s.crc_mismatches > 0 {
        return Err(CliError::Runtime("equivalence check failed".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ranges() {
        let r: UniformRange<f64> = parse_range("r0", "1-15").unwrap();
        assert_eq!((r.lo, r.hi), (1.0, 15.0));
        let r: UniformRange<usize> = parse_range("sources", "3").unwrap();
        assert_eq!((r.lo, r.hi), (3, 3));
        assert!(parse_range::<f64>("r0", "x").is_err());
    }

    #[test]
    fn graph_seed_suffix_overrides_the_run_seed() {
        let pinned = load_graph("ba:30:2@4", 99).unwrap();
        assert_eq!(pinned, load_graph("ba:30:2", 4).unwrap());
        assert_ne!(pinned, load_graph("ba:30:2", 99).unwrap());
        assert!(load_graph("ba:30:2@x", 0).is_err());
    }

    #[test]
    fn help_and_bad_flags() {
        assert_eq!(main_with_args(["setcp", "--help"]), 0);
        assert_eq!(main_with_args(["setcp", "--version"]), 0);
        assert_eq!(main_with_args(["setcp", "simulate", "--bogus"]), 1);
        assert_eq!(main_with_args(["setcp"]), 1);
    }

    #[test]
    fn oracle_check_passes() {
        let s = oracle_check(8, 50, 3).unwrap();
        assert_eq!(s.prefix_checks, 150);
        assert_eq!(s.prefix_mismatches + s.crc_mismatches, 0);
        assert!(oracle_check(17, 1, 0).is_err());
    }
}
