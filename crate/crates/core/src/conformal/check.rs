//! Randomized cross-checks between the prefix construction and its two
//! independent characterizations: exhaustive superset minimization and the
//! risk-control threshold family.

use rand::seq::index::sample;
use rand::Rng;

use super::{
    calibrate, cqioc_bruteforce, crc_calibrate, crc_predict, crc_threshold, predict, score, ConformalError,
    ConformalModel, NominalLevels, ScoreKind,
};
use crate::estimator::ProbVector;

/// A probability vector that is tie-heavy (values on a grid of eighths,
/// zeros included) half of the time and continuous otherwise.
pub fn random_prob_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProbVector {
    let grid = rng.gen_bool(0.5);
    loop {
        let p: Vec<f64> = (0..n)
            .map(|_| {
                if grid {
                    f64::from(rng.gen_range(0..=8u8)) / 8.0
                } else {
                    rng.gen::<f64>()
                }
            })
            .collect();
        if let Ok(pi) = ProbVector::new(p) {
            return pi;
        }
    }
}

/// A non-empty random subset of `0..n`, sorted.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let k = rng.gen_range(1..=n);
    let mut y = sample(rng, n, k).into_vec();
    y.sort_unstable();
    y
}

/// A threshold that is, with equal chance, exactly some singleton score,
/// a uniform value in `[-1, 1]`, or `+inf`.
pub fn random_threshold<R: Rng + ?Sized>(rng: &mut R, kind: ScoreKind, pi: &ProbVector) -> Result<f64, ConformalError> {
    Ok(match rng.gen_range(0..3) {
        0 => score(kind, pi, &[rng.gen_range(0..pi.len())])?,
        1 => rng.gen_range(-1.0..=1.0),
        _ => f64::INFINITY,
    })
}

/// Whether `predict` and the exhaustive construction give the same set.
pub fn prefix_matches_bruteforce(pi: &ProbVector, q_hat: f64, kind: ScoreKind) -> Result<bool, ConformalError> {
    let model = ConformalModel {
        score: kind,
        levels: NominalLevels::new(0.5, 0.0)?,
        q_hat,
        n_cal: 1,
    };
    Ok(predict(&model, pi).nodes == cqioc_bruteforce(pi, q_hat, kind)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrcComparison {
    pub lambda_hat: f64,
    pub q_hat_min: f64,
    /// `|lambda_hat - (1 + q_hat)|`, 0 when both are infinite.
    pub gap: f64,
    pub sets_equal: bool,
}

/// Calibrates both routes on `cal` and compares their sets on `test`.
pub fn compare_crc_with_min(
    cal: &[(ProbVector, Vec<usize>)],
    test: &[ProbVector],
    levels: NominalLevels,
) -> Result<CrcComparison, ConformalError> {
    let lambda_hat = crc_calibrate(cal, levels)?;
    let model = calibrate(cal, ScoreKind::Min, levels)?;
    let gap = if lambda_hat.is_infinite() && model.q_hat.is_infinite() {
        0.0
    } else {
        (crc_threshold(lambda_hat) - model.q_hat).abs()
    };
    let sets_equal = test
        .iter()
        .all(|pi| crc_predict(pi, lambda_hat).nodes == predict(&model, pi).nodes);
    Ok(CrcComparison {
        lambda_hat,
        q_hat_min: model.q_hat,
        gap,
        sets_equal,
    })
}

/// One random risk-control instance on `n` nodes: 5 to 40 calibration
/// pairs, 5 test vectors, random levels.
pub fn random_crc_instance<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
) -> Result<(Vec<(ProbVector, Vec<usize>)>, Vec<ProbVector>, NominalLevels), ConformalError> {
    let n_cal = rng.gen_range(5..=40);
    let cal = (0..n_cal)
        .map(|_| (random_prob_vector(rng, n), random_subset(rng, n)))
        .collect();
    let test = (0..5).map(|_| random_prob_vector(rng, n)).collect();
    let levels = NominalLevels::new(rng.gen_range(0.01..0.5), rng.gen_range(0.0..0.9))?;
    Ok((cal, test, levels))
}
