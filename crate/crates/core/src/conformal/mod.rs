//! Conformal prediction sets with a recall guarantee.
//!
//! Given estimated source probabilities `pi`, a set `U` of nodes is first
//! closed upward, `gamma(pi, U) = {v : pi(v) >= min_{z in U} pi(z)}`, and then
//! scored by a monotone non-conformity score (see [`ScoreKind`]). Each
//! calibration source set `Y_i` is shrunk to its top `ceil((1 - beta)|Y_i|)`
//! members before scoring, and the threshold `q_hat` is the finite-sample
//! `(1 - alpha)(1 + 1/n)` quantile of those scores. The prediction set for a
//! new input is `{v : score(pi, {v}) <= q_hat}`, which contains at least a
//! `1 - beta` fraction of the true sources with probability at least
//! `1 - alpha` under exchangeability.
//!
//! Ties: `gamma` compares probability values literally, so tied nodes enter
//! together. Shrinking and prefix enumeration use the total order
//! (probability descending, node index ascending).
//!
//! [`crc`] implements the threshold-family risk-control route and [`cqioc`]
//! the exhaustive superset-minimization rule; both coincide with the
//! prefix sets and serve as independent cross-checks.

pub mod check;
pub mod cqioc;
pub mod crc;
mod model_io;
mod score;
mod split;

pub use cqioc::{cqioc_bruteforce, min_superset_scores, CQIOC_MAX_NODES};
pub use crc::{crc_calibrate, crc_predict, crc_threshold};
pub use model_io::{read_model, write_model, ModelFile};
pub use score::{gamma, ranked_order, score, ScoreProfile};
pub use split::{
    calibrate, calibration_scores, evaluate_set, finite_sample_quantile, predict, shrink, SetEvaluation,
};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConformalError {
    #[error("node set is empty")]
    EmptySet,
    #[error("node {node} out of range for {n_nodes} nodes")]
    NodeOutOfRange { node: usize, n_nodes: usize },
    #[error("invalid nominal levels: {0}")]
    InvalidLevels(String),
    #[error("calibration set is empty")]
    EmptyCalibration,
    #[error("quantile of an empty multiset")]
    EmptyQuantile,
    #[error("exhaustive enumeration refused for {n_nodes} nodes (limit {limit})")]
    TooManyNodes { n_nodes: usize, limit: usize },
    #[error("unknown score kind {0:?}; expected pre, rec or min")]
    UnknownScore(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

/// Monotone non-conformity scores over gamma-closed sets `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    /// Negative mean probability over `G` (a precision surrogate).
    Pre,
    /// Probability mass of `G` over the mass of all nodes (a recall surrogate).
    Rec,
    /// Negative minimum probability over `G`.
    Min,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 3] = [ScoreKind::Pre, ScoreKind::Rec, ScoreKind::Min];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pre => "pre",
            Self::Rec => "rec",
            Self::Min => "min",
        }
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreKind {
    type Err = ConformalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pre" => Ok(Self::Pre),
            "rec" => Ok(Self::Rec),
            "min" => Ok(Self::Min),
            other => Err(ConformalError::UnknownScore(other.to_string())),
        }
    }
}

/// `alpha` in (0, 1) bounds the miss probability; `beta` in [0, 1) is the
/// tolerated fraction of missed sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NominalLevels {
    alpha: f64,
    beta: f64,
}

impl NominalLevels {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, ConformalError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ConformalError::InvalidLevels(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        // beta = 1 would allow shrinking to the empty set, on which no score is defined.
        if !(beta >= 0.0 && beta < 1.0) {
            return Err(ConformalError::InvalidLevels(format!("beta must lie in [0, 1), got {beta}")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Calibrated threshold; `q_hat` is `+inf` or one of the calibration scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalModel {
    pub score: ScoreKind,
    pub levels: NominalLevels,
    pub q_hat: f64,
    pub n_cal: usize,
}

/// Sorted node indices plus the threshold that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub nodes: Vec<usize>,
    pub threshold_used: f64,
}

impl PredictionSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }
}

/// Largest `j` in `0..=total` with `j / total <= level`.
///
/// Comparing the correctly rounded ratio against `level` keeps boundary cases
/// such as `3/10 <= 0.3` exact, where `(1 - 0.3) * 10` would not be.
fn max_fraction_count(level: f64, total: usize) -> usize {
    let t = total as f64;
    let mut j = ((level * t).floor().max(0.0) as usize).min(total);
    while j < total && ((j + 1) as f64) / t <= level {
        j += 1;
    }
    while j > 0 && (j as f64) / t > level {
        j -= 1;
    }
    j
}

/// `ceil((1 - beta) * k)`: sources a set must contain to reach recall `1 - beta`.
pub fn required_hits(beta: f64, k: usize) -> usize {
    k - max_fraction_count(beta, k)
}

/// `ceil((1 - alpha)(n + 1))`: rank of the conformal quantile (may exceed `n`).
pub fn quantile_rank(alpha: f64, n: usize) -> usize {
    n + 1 - max_fraction_count(alpha, n + 1)
}
