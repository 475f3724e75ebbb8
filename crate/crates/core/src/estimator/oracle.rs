use rand::Rng;

use super::{EstimatorError, ProbVector, SourceEstimator};
use crate::diffusion::LabeledSample;
use crate::rng::{substream, DOMAIN_ESTIMATOR};

/// Test double that peeks at the labels:
/// `pi(v) = (1 - noise) * [v in Y] + noise * u_v`, `u_v ~ U(0, 1)`.
///
/// `noise = 0` separates sources perfectly; `noise = 1` is independent of Y.
pub fn estimate_oracle(sample: &LabeledSample, noise: f64, seed: u64) -> Result<ProbVector, EstimatorError> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(EstimatorError::InvalidParameter(format!("noise must lie in [0, 1], got {noise}")));
    }
    let n = sample.snapshots.n_nodes();
    let mut rng = substream(seed, &[DOMAIN_ESTIMATOR, sample.id]);
    let mut probs: Vec<f64> = (0..n).map(|_| noise * rng.gen::<f64>()).collect();
    for &v in &sample.sources {
        probs[v] += 1.0 - noise;
    }
    for p in &mut probs {
        *p = p.min(1.0);
    }
    ProbVector::new(probs)
}

pub struct OracleEstimator {
    noise: f64,
    seed: u64,
}

impl OracleEstimator {
    pub fn new(noise: f64, seed: u64) -> Result<Self, EstimatorError> {
        if !(0.0..=1.0).contains(&noise) {
            return Err(EstimatorError::InvalidParameter(format!("noise must lie in [0, 1], got {noise}")));
        }
        Ok(Self { noise, seed })
    }
}

impl SourceEstimator for OracleEstimator {
    fn estimate(&self, sample: &LabeledSample) -> Result<ProbVector, EstimatorError> {
        estimate_oracle(sample, self.noise, self.seed)
    }

    fn name(&self) -> String {
        format!("oracle(noise={})", self.noise)
    }
}
