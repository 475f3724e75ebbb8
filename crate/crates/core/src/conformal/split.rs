use rayon::prelude::*;

use super::score::{score, ScoreProfile};
use super::{quantile_rank, required_hits, ConformalError, ConformalModel, NominalLevels, PredictionSet, ScoreKind};
use crate::estimator::ProbVector;

/// Keeps the `ceil((1 - beta)|y|)` members of `y` with the largest
/// probability (ties to the smaller index). Returned sorted ascending.
pub fn shrink(pi: &ProbVector, y: &[usize], beta: f64) -> Result<Vec<usize>, ConformalError> {
    if y.is_empty() {
        return Err(ConformalError::EmptySet);
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(ConformalError::InvalidLevels(format!("beta must lie in [0, 1), got {beta}")));
    }
    if let Some(&node) = y.iter().find(|&&v| v >= pi.len()) {
        return Err(ConformalError::NodeOutOfRange { node, n_nodes: pi.len() });
    }
    let mut ranked = y.to_vec();
    ranked.sort_unstable();
    ranked.dedup();
    ranked.sort_by(|&a, &b| pi[b].total_cmp(&pi[a]).then(a.cmp(&b)));
    ranked.truncate(required_hits(beta, ranked.len()));
    ranked.sort_unstable();
    Ok(ranked)
}

/// The `ceil((1 - alpha)(n + 1))`-th smallest value, or `+inf` when that
/// rank exceeds `n`.
pub fn finite_sample_quantile(values: &[f64], alpha: f64) -> Result<f64, ConformalError> {
    if values.is_empty() {
        return Err(ConformalError::EmptyQuantile);
    }
    let k = quantile_rank(alpha, values.len());
    if k > values.len() {
        return Ok(f64::INFINITY);
    }
    let mut sorted = values.to_vec();
    let (_, kth, _) = sorted.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

/// `score(kind, pi_i, shrink(pi_i, Y_i, beta))` for every calibration pair.
pub fn calibration_scores(
    samples: &[(ProbVector, Vec<usize>)],
    kind: ScoreKind,
    beta: f64,
) -> Result<Vec<f64>, ConformalError> {
    samples
        .par_iter()
        .map(|(pi, y)| score(kind, pi, &shrink(pi, y, beta)?))
        .collect()
}

pub fn calibrate(
    samples: &[(ProbVector, Vec<usize>)],
    kind: ScoreKind,
    levels: NominalLevels,
) -> Result<ConformalModel, ConformalError> {
    if samples.is_empty() {
        return Err(ConformalError::EmptyCalibration);
    }
    let scores = calibration_scores(samples, kind, levels.beta())?;
    Ok(ConformalModel {
        score: kind,
        levels,
        q_hat: finite_sample_quantile(&scores, levels.alpha())?,
        n_cal: samples.len(),
    })
}

/// `{v : score(pi, {v}) <= q_hat}`; all nodes when `q_hat` is infinite.
pub fn predict(model: &ConformalModel, pi: &ProbVector) -> PredictionSet {
    let nodes = if model.q_hat == f64::INFINITY {
        (0..pi.len()).collect()
    } else {
        ScoreProfile::new(model.score, pi).select(model.q_hat)
    };
    PredictionSet {
        nodes,
        threshold_used: model.q_hat,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetEvaluation {
    /// `|C ∩ Y| / |C|`, 0 for an empty set.
    pub precision: f64,
    /// `|C ∩ Y| / |Y|`.
    pub recall: f64,
    /// Whether recall reaches `1 - beta`.
    pub included: bool,
}

pub fn evaluate_set(c: &PredictionSet, y: &[usize], beta: f64) -> Result<SetEvaluation, ConformalError> {
    if y.is_empty() {
        return Err(ConformalError::EmptySet);
    }
    let mut sources = y.to_vec();
    sources.sort_unstable();
    sources.dedup();
    let hits = sources.iter().filter(|&&v| c.contains(v)).count();
    Ok(SetEvaluation {
        precision: if c.is_empty() { 0.0 } else { hits as f64 / c.len() as f64 },
        recall: hits as f64 / sources.len() as f64,
        included: hits >= required_hits(beta, sources.len()),
    })
}
