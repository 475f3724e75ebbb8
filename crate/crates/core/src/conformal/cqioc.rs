//! Exhaustive superset-minimization sets,
//! `{v : min_{U contains v} score(pi, U) <= q_hat}`, by enumerating all
//! `2^N - 1` non-empty subsets. Exponential; only for cross-checking the
//! prefix construction on small graphs.

use super::score::score;
use super::{ConformalError, ScoreKind};
use crate::estimator::ProbVector;

pub const CQIOC_MAX_NODES: usize = 16;

/// `min_{U contains v} score(kind, pi, U)` for every node `v`.
pub fn min_superset_scores(pi: &ProbVector, kind: ScoreKind) -> Result<Vec<f64>, ConformalError> {
    let n = pi.len();
    if n > CQIOC_MAX_NODES {
        return Err(ConformalError::TooManyNodes {
            n_nodes: n,
            limit: CQIOC_MAX_NODES,
        });
    }
    let mut best = vec![f64::INFINITY; n];
    let mut members = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        members.clear();
        members.extend((0..n).filter(|&v| mask & (1 << v) != 0));
        let s = score(kind, pi, &members)?;
        for &v in &members {
            if s < best[v] {
                best[v] = s;
            }
        }
    }
    Ok(best)
}

pub fn cqioc_bruteforce(pi: &ProbVector, q_hat: f64, kind: ScoreKind) -> Result<Vec<usize>, ConformalError> {
    let best = min_superset_scores(pi, kind)?;
    Ok((0..pi.len()).filter(|&v| best[v] <= q_hat).collect())
}
