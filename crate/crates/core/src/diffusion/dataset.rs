use rand::seq::index;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{observe, simulate_with_rng, DiffusionError, LabeledSample, SampleParams, SirParams};
use crate::graph::{spectral_radius, Graph, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::rng::{substream, DOMAIN_SAMPLE};

/// Closed interval `[lo, hi]` sampled uniformly; `lo == hi` is a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Copy> UniformRange<T> {
    pub fn point(value: T) -> Self {
        Self { lo: value, hi: value }
    }
}

/// How the infection rate of each sample is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfectionDist {
    /// `sigma_inf` drawn directly.
    Rate(UniformRange<f64>),
    /// `R0` drawn, then `sigma_inf = R0 * sigma_rec / lambda1`.
    R0(UniformRange<f64>),
}

/// Start of the observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum T1Rule {
    Fixed(usize),
    /// `t1 = 2` for single-source samples or slow spread, otherwise `t1 = 1`.
    /// Spread is slow when the configured R0 range lies inside `[1, 15]`; for
    /// rate-specified samples the sample's own R0 is tested (SI counts as fast).
    Protocol,
}

/// Generative configuration shared by every sample of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub infection: InfectionDist,
    pub sigma_rec: UniformRange<f64>,
    pub n_sources: UniformRange<usize>,
    pub t1: T1Rule,
    pub window: usize,
    pub stride: usize,
    pub horizon: usize,
}

const SLOW_R0: (f64, f64) = (1.0, 15.0);

impl Default for DatasetConfig {
    /// |Y| in [1, 15], R0 in [1, 15], sigma_rec in [0.1, 0.4], 16 snapshots.
    fn default() -> Self {
        Self {
            infection: InfectionDist::R0(UniformRange { lo: 1.0, hi: 15.0 }),
            sigma_rec: UniformRange { lo: 0.1, hi: 0.4 },
            n_sources: UniformRange { lo: 1, hi: 15 },
            t1: T1Rule::Protocol,
            window: super::DEFAULT_WINDOW,
            stride: 1,
            horizon: super::DEFAULT_HORIZON,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self, n_nodes: usize) -> Result<(), DiffusionError> {
        let bad = |msg: String| Err(DiffusionError::InvalidParams(msg));
        let UniformRange { lo, hi } = self.n_sources;
        if lo < 1 || lo > hi {
            return bad(format!("source count range [{lo}, {hi}] must satisfy 1 <= lo <= hi"));
        }
        if hi > n_nodes {
            return Err(DiffusionError::TooManySources {
                requested: hi,
                n_nodes,
            });
        }
        let (rate_lo, rate_hi) = match self.infection {
            InfectionDist::Rate(r) | InfectionDist::R0(r) => (r.lo, r.hi),
        };
        if !(rate_lo <= rate_hi) || !(rate_lo > 0.0) {
            return bad(format!("infection range [{rate_lo}, {rate_hi}] must be positive and ordered"));
        }
        let rec = self.sigma_rec;
        if !(rec.lo <= rec.hi && rec.lo >= 0.0 && rec.hi < 1.0) {
            return bad(format!("sigma_rec range [{}, {}] must lie in [0, 1)", rec.lo, rec.hi));
        }
        if self.window < 1 || self.stride < 1 {
            return bad("window and stride must be at least 1".into());
        }
        let max_t1 = match self.t1 {
            T1Rule::Fixed(t) if t < 1 => return bad("t1 must be at least 1".into()),
            T1Rule::Fixed(t) => t,
            T1Rule::Protocol => 2,
        };
        if max_t1 + (self.window - 1) * self.stride > self.horizon {
            return Err(DiffusionError::WindowExceedsHorizon {
                t1: max_t1,
                m: self.window,
                stride: self.stride,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    fn t1_for(&self, n_sources: usize, r0: Option<f64>) -> usize {
        match self.t1 {
            T1Rule::Fixed(t) => t,
            T1Rule::Protocol => {
                let slow = match (self.infection, r0) {
                    (InfectionDist::R0(range), _) => range.lo >= SLOW_R0.0 && range.hi <= SLOW_R0.1,
                    (InfectionDist::Rate(_), Some(r0)) => (SLOW_R0.0..=SLOW_R0.1).contains(&r0),
                    (InfectionDist::Rate(_), None) => false,
                };
                if n_sources == 1 || slow {
                    2
                } else {
                    1
                }
            }
        }
    }
}

fn draw_f64<R: Rng>(rng: &mut R, range: UniformRange<f64>) -> f64 {
    if range.lo == range.hi {
        range.lo
    } else {
        rng.gen_range(range.lo..=range.hi)
    }
}

fn draw_sample(g: &Graph, cfg: &DatasetConfig, lambda1: f64, master: u64, i: u64) -> Result<LabeledSample, DiffusionError> {
    let mut rng = substream(master, &[DOMAIN_SAMPLE, i]);
    let k = rng.gen_range(cfg.n_sources.lo..=cfg.n_sources.hi);
    let mut sources = index::sample(&mut rng, g.n_nodes(), k).into_vec();
    sources.sort_unstable();
    let sigma_rec = draw_f64(&mut rng, cfg.sigma_rec);
    let params = match cfg.infection {
        InfectionDist::Rate(range) => SirParams::new(draw_f64(&mut rng, range), sigma_rec, cfg.horizon)?,
        InfectionDist::R0(range) => SirParams::from_r0(draw_f64(&mut rng, range), sigma_rec, lambda1, cfg.horizon)?,
    };
    let r0 = params.r0.or_else(|| (sigma_rec > 0.0).then(|| params.sigma_inf * lambda1 / sigma_rec));
    let t1 = cfg.t1_for(k, r0);
    let mut sim_rng = substream(rng.next_u64(), &[]);
    let traj = simulate_with_rng(g, params.sigma_inf, params.sigma_rec, &sources, cfg.horizon, &mut sim_rng)?;
    let snapshots = observe(&traj, t1, cfg.window, cfg.stride)?;
    Ok(LabeledSample {
        id: i,
        snapshots,
        sources,
        params: SampleParams {
            sigma_inf: params.sigma_inf,
            sigma_rec: params.sigma_rec,
            r0,
            t1,
        },
    })
}

/// Draws `n_samples` i.i.d. labeled samples.
///
/// Sample `i` uses the stream `(seed, [DOMAIN_SAMPLE, i])` for, in order, the
/// source count, the source set (uniform without replacement), `sigma_rec`,
/// the infection rate or R0, and a 64-bit simulation seed. Samples are built
/// in parallel; the output does not depend on the thread count.
pub fn sample_dataset(g: &Graph, cfg: &DatasetConfig, n_samples: usize, seed: u64) -> Result<Vec<LabeledSample>, DiffusionError> {
    cfg.validate(g.n_nodes())?;
    if n_samples == 0 {
        return Ok(Vec::new());
    }
    let lambda1 = match cfg.infection {
        InfectionDist::R0(_) => spectral_radius(g, DEFAULT_TOL, DEFAULT_MAX_ITER)?,
        // only used to annotate R0
        InfectionDist::Rate(_) => spectral_radius(g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap_or(0.0),
    };
    (0..n_samples as u64)
        .into_par_iter()
        .map(|i| draw_sample(g, cfg, lambda1, seed, i))
        .collect()
}
