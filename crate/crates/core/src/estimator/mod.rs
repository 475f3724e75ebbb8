//! Per-node source-probability estimators.
//!
//! Any map from observed snapshots to a [`ProbVector`] can drive the
//! conformal layer; its coverage does not depend on estimator quality, only
//! the size of the resulting sets does.

mod file;
mod heuristic;
mod monte_carlo;
mod oracle;

pub use file::{write_prob_file, FileEstimator};
pub use heuristic::{estimate_heuristic, HeuristicEstimator, HeuristicWeights};
pub use monte_carlo::{estimate_monte_carlo, monte_carlo_fitness, MonteCarloEstimator};
pub use oracle::{estimate_oracle, OracleEstimator};

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffusion::{DiffusionError, LabeledSample};
use crate::graph::Graph;

/// Probability assigned to nodes with no evidence of being a source.
pub const EPS_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("invalid probability vector: {0}")]
    InvalidProbVector(String),
    #[error("invalid estimator parameter: {0}")]
    InvalidParameter(String),
    #[error("no precomputed probabilities for sample {0}")]
    MissingSample(u64),
    #[error("sample has {got} nodes but the estimator expects {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
}

/// Marginal source-probability estimates, one per node.
///
/// Entries lie in `[0, 1]`, at least one is positive; they need not sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self, EstimatorError> {
        if probs.is_empty() {
            return Err(EstimatorError::InvalidProbVector("empty".into()));
        }
        if let Some((v, p)) = probs.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(EstimatorError::InvalidProbVector(format!("entry {v} is {p}, outside [0, 1]")));
        }
        if !probs.iter().any(|&p| p > 0.0) {
            return Err(EstimatorError::InvalidProbVector("all entries are zero".into()));
        }
        Ok(Self(probs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: usize) -> f64 {
        self.0[v]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, v: usize) -> &f64 {
        &self.0[v]
    }
}

/// Maps a sample to per-node source probabilities.
///
/// Implementations read only `sample.snapshots` (plus, for the Monte Carlo
/// fit, the recorded diffusion rates), except the oracle test double, which
/// reads the labels, and the file-backed estimator, which keys on the id.
pub trait SourceEstimator: Send + Sync {
    fn estimate(&self, sample: &LabeledSample) -> Result<ProbVector, EstimatorError>;

    fn name(&self) -> String;
}

/// Serializable estimator choice, as used in experiment configs and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorSpec {
    Heuristic,
    MonteCarlo { k_sims: usize, seed: u64 },
    Oracle { noise: f64, seed: u64 },
    File { path: PathBuf },
}

impl EstimatorSpec {
    pub fn build(&self, graph: Arc<Graph>) -> Result<Box<dyn SourceEstimator>, EstimatorError> {
        Ok(match self {
            Self::Heuristic => Box::new(HeuristicEstimator::new(graph)),
            Self::MonteCarlo { k_sims, seed } => Box::new(MonteCarloEstimator::new(graph, *k_sims, *seed)?),
            Self::Oracle { noise, seed } => Box::new(OracleEstimator::new(*noise, *seed)?),
            Self::File { path } => Box::new(FileEstimator::load(path)?),
        })
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Heuristic => write!(f, "heuristic"),
            Self::MonteCarlo { k_sims, .. } => write!(f, "monte_carlo(k={k_sims})"),
            Self::Oracle { noise, .. } => write!(f, "oracle(noise={noise})"),
            Self::File { path } => write!(f, "file({})", path.display()),
        }
    }
}

impl std::str::FromStr for EstimatorSpec {
    type Err = EstimatorError;

    /// `heuristic`, `mc:K[@SEED]`, `oracle:NOISE[@SEED]` or `file:PATH`; seeds default to 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || {
            EstimatorError::InvalidParameter(format!(
                "unrecognized estimator {s:?}; expected heuristic, mc:K[@SEED], oracle:NOISE[@SEED] or file:PATH"
            ))
        };
        let (kind, arg) = s.split_once(':').map_or((s, None), |(k, a)| (k, Some(a)));
        let with_seed = |arg: &str| -> Result<(String, u64), EstimatorError> {
            match arg.split_once('@') {
                Some((value, seed)) => Ok((value.to_string(), seed.parse().map_err(|_| bad())?)),
                None => Ok((arg.to_string(), 0)),
            }
        };
        match (kind, arg) {
            ("heuristic", None) => Ok(Self::Heuristic),
            ("mc" | "monte_carlo", Some(arg)) => {
                let (k, seed) = with_seed(arg)?;
                Ok(Self::MonteCarlo {
                    k_sims: k.parse().map_err(|_| bad())?,
                    seed,
                })
            }
            ("oracle", Some(arg)) => {
                let (noise, seed) = with_seed(arg)?;
                Ok(Self::Oracle {
                    noise: noise.parse().map_err(|_| bad())?,
                    seed,
                })
            }
            ("file", Some(path)) => Ok(Self::File { path: path.into() }),
            _ => Err(bad()),
        }
    }
}

impl EstimatorSpec {
    /// The string form accepted by `from_str`, seeds included.
    pub fn to_arg(&self) -> String {
        match self {
            Self::Heuristic => "heuristic".into(),
            Self::MonteCarlo { k_sims, seed } => format!("mc:{k_sims}@{seed}"),
            Self::Oracle { noise, seed } => format!("oracle:{noise}@{seed}"),
            Self::File { path } => format!("file:{}", path.display()),
        }
    }

    /// Replaces the seed of seeded estimators.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Self::MonteCarlo { k_sims, .. } => Self::MonteCarlo { k_sims, seed },
            Self::Oracle { noise, .. } => Self::Oracle { noise, seed },
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prob_vector_invariants() {
        assert!(ProbVector::new(vec![0.0, 0.5, 1.0]).is_ok());
        assert!(ProbVector::new(vec![]).is_err());
        assert!(ProbVector::new(vec![0.0, 0.0]).is_err());
        assert!(ProbVector::new(vec![0.5, 1.1]).is_err());
        assert!(ProbVector::new(vec![0.5, -0.1]).is_err());
        assert!(ProbVector::new(vec![0.5, f64::NAN]).is_err());
    }

    #[test]
    fn parses_estimator_specs() {
        assert_eq!("heuristic".parse::<EstimatorSpec>().unwrap(), EstimatorSpec::Heuristic);
        assert_eq!(
            "mc:50".parse::<EstimatorSpec>().unwrap(),
            EstimatorSpec::MonteCarlo { k_sims: 50, seed: 0 }
        );
        assert_eq!(
            "oracle:0.5".parse::<EstimatorSpec>().unwrap(),
            EstimatorSpec::Oracle { noise: 0.5, seed: 0 }
        );
        assert_eq!(
            "oracle:0@9".parse::<EstimatorSpec>().unwrap(),
            EstimatorSpec::Oracle { noise: 0.0, seed: 9 }
        );
        for spec in [
            EstimatorSpec::Heuristic,
            EstimatorSpec::MonteCarlo { k_sims: 7, seed: 3 },
            EstimatorSpec::Oracle { noise: 0.25, seed: 11 },
            EstimatorSpec::File { path: "p.csv".into() },
        ] {
            assert_eq!(spec.to_arg().parse::<EstimatorSpec>().unwrap(), spec);
        }
        assert!("mc:3@x".parse::<EstimatorSpec>().is_err());
        assert!("oracle".parse::<EstimatorSpec>().is_err());
        assert!("gnn".parse::<EstimatorSpec>().is_err());
    }
}
