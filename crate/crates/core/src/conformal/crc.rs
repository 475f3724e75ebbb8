//! Conformal risk control over the threshold family
//! `C_lambda(X) = {v : 1 - pi(v) <= lambda}`.
//!
//! `lambda_hat` is the smallest `lambda` with
//! `(#{i : recall(C_lambda(X_i), Y_i) < 1 - beta} + 1) / (n + 1) <= alpha`.
//! The miss count only changes where `lambda` crosses some `1 - pi_i(y)`
//! with `y` a true source, so those values are the candidates, and because
//! the family is nested the miss count is non-increasing and a binary search
//! over the sorted candidates finds the infimum.
//!
//! This route never evaluates a non-conformity score; the resulting sets
//! coincide with the `min`-score prefix sets and `lambda_hat = 1 + q_hat`.

use super::{required_hits, ConformalError, NominalLevels, PredictionSet};
use crate::estimator::ProbVector;

fn in_family(p: f64, lambda: f64) -> bool {
    1.0 - p <= lambda
}

fn misses(samples: &[(ProbVector, Vec<usize>)], beta: f64, lambda: f64) -> usize {
    samples
        .iter()
        .filter(|(pi, y)| {
            let hits = y.iter().filter(|&&v| in_family(pi[v], lambda)).count();
            hits < required_hits(beta, y.len())
        })
        .count()
}

/// `lambda_hat`, or `+inf` when even the full node set misses too often.
pub fn crc_calibrate(samples: &[(ProbVector, Vec<usize>)], levels: NominalLevels) -> Result<f64, ConformalError> {
    if samples.is_empty() {
        return Err(ConformalError::EmptyCalibration);
    }
    for (pi, y) in samples {
        if y.is_empty() {
            return Err(ConformalError::EmptySet);
        }
        if let Some(&node) = y.iter().find(|&&v| v >= pi.len()) {
            return Err(ConformalError::NodeOutOfRange { node, n_nodes: pi.len() });
        }
    }
    let n1 = (samples.len() + 1) as f64;
    let (alpha, beta) = (levels.alpha(), levels.beta());
    let controlled = |lambda: f64| (misses(samples, beta, lambda) as f64 + 1.0) / n1 <= alpha;

    let mut candidates: Vec<f64> = samples
        .iter()
        .flat_map(|(pi, y)| y.iter().map(move |&v| 1.0 - pi[v]))
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let first_ok = candidates.partition_point(|&lambda| !controlled(lambda));
    Ok(candidates.get(first_ok).copied().unwrap_or(f64::INFINITY))
}

/// `C_lambda(X)` for a test input.
pub fn crc_predict(pi: &ProbVector, lambda: f64) -> PredictionSet {
    PredictionSet {
        nodes: (0..pi.len()).filter(|&v| in_family(pi[v], lambda)).collect(),
        threshold_used: lambda,
    }
}

/// The `min`-score threshold implied by `lambda_hat` (`q_hat = lambda_hat - 1`).
pub fn crc_threshold(lambda_hat: f64) -> f64 {
    lambda_hat - 1.0
}
