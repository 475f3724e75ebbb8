use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::{EstimatorError, ProbVector, SourceEstimator, EPS_FLOOR};
use crate::diffusion::{LabeledSample, SirParams, SnapshotMatrix, Status};
use crate::graph::Graph;
use crate::rng::{substream, DOMAIN_ESTIMATOR};

/// Ever-infected masks of the observed columns.
struct Observed {
    times: Vec<usize>,
    masks: Vec<Vec<bool>>,
    sizes: Vec<usize>,
}

impl Observed {
    fn new(x: &SnapshotMatrix) -> Self {
        let masks: Vec<Vec<bool>> = x
            .columns()
            .iter()
            .map(|col| col.iter().map(|s| s.ever_infected()).collect())
            .collect();
        let sizes = masks.iter().map(|m| m.iter().filter(|&&b| b).count()).collect();
        Self {
            times: x.times().to_vec(),
            masks,
            sizes,
        }
    }
}

#[derive(Default)]
struct Scratch {
    status: Vec<Status>,
    active: Vec<usize>,
    kept: Vec<usize>,
    fresh: Vec<usize>,
    ever: Vec<usize>,
}

/// Merges two ascending, disjoint lists into `out`.
fn merge_sorted(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Mean Jaccard fit of one simulation from `c` against the observed columns.
///
/// Same dynamics and draw order as [`crate::diffusion::simulate_with_rng`] (infected nodes in
/// ascending order, neighbours in adjacency order, then the recovery draw),
/// but only the infected frontier is visited and no trajectory is stored.
fn single_source_fit<R: Rng + ?Sized>(
    g: &Graph,
    sigma_inf: f64,
    sigma_rec: f64,
    c: usize,
    observed: &Observed,
    rng: &mut R,
    scratch: &mut Scratch,
) -> f64 {
    let Scratch {
        status,
        active,
        kept,
        fresh,
        ever,
    } = scratch;
    status.clear();
    status.resize(g.n_nodes(), Status::S);
    status[c] = Status::I;
    active.clear();
    active.push(c);
    ever.clear();
    ever.push(c);

    let jaccard_at = |j: usize, ever: &[usize]| {
        let inter = ever.iter().filter(|&&v| observed.masks[j][v]).count();
        let union = ever.len() + observed.sizes[j] - inter;
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    };

    let mut fit = 0.0;
    let mut t = 0;
    for (j, &tj) in observed.times.iter().enumerate() {
        while t < tj && !active.is_empty() {
            kept.clear();
            fresh.clear();
            for &u in active.iter() {
                for &v in g.neighbors(u) {
                    if status[v] == Status::S && rng.gen_bool(sigma_inf) {
                        status[v] = Status::I;
                        fresh.push(v);
                    }
                }
                if sigma_rec > 0.0 && rng.gen_bool(sigma_rec) {
                    status[u] = Status::R;
                } else {
                    kept.push(u);
                }
            }
            ever.extend_from_slice(fresh);
            fresh.sort_unstable();
            merge_sorted(kept, fresh, active);
            t += 1;
        }
        fit += jaccard_at(j, ever);
    }
    fit / observed.times.len() as f64
}

/// Candidate sources: every node infected or recovered in the first
/// snapshot (sources stay I or R forever), or all nodes if none is.
fn candidates(x: &SnapshotMatrix) -> Vec<usize> {
    let support: Vec<usize> = (0..x.n_nodes()).filter(|&v| x.column(0)[v].ever_infected()).collect();
    if support.is_empty() {
        (0..x.n_nodes()).collect()
    } else {
        support
    }
}

/// Mean Jaccard fit of `k_sims` single-source simulations per candidate.
///
/// Returns one entry per node; non-candidates get 0. Candidate `c` draws from
/// the stream `(seed, [DOMAIN_ESTIMATOR, sample_key, c])`.
pub fn monte_carlo_fitness(
    x: &SnapshotMatrix,
    g: &Graph,
    params: &SirParams,
    k_sims: usize,
    seed: u64,
    sample_key: u64,
) -> Result<Vec<f64>, EstimatorError> {
    if k_sims == 0 {
        return Err(EstimatorError::InvalidParameter("k_sims must be at least 1".into()));
    }
    if x.n_nodes() != g.n_nodes() {
        return Err(EstimatorError::SizeMismatch {
            expected: g.n_nodes(),
            got: x.n_nodes(),
        });
    }
    params.validate()?;
    let observed = Observed::new(x);
    let cands = candidates(x);
    let fits: Vec<f64> = cands
        .par_iter()
        .map_init(Scratch::default, |scratch, &c| {
            let mut rng = substream(seed, &[DOMAIN_ESTIMATOR, sample_key, c as u64]);
            let mut total = 0.0;
            for _ in 0..k_sims {
                total += single_source_fit(g, params.sigma_inf, params.sigma_rec, c, &observed, &mut rng, scratch);
            }
            total / k_sims as f64
        })
        .collect();
    let mut fitness = vec![0.0; g.n_nodes()];
    for (&c, f) in cands.iter().zip(fits) {
        fitness[c] = f;
    }
    Ok(fitness)
}

/// Fitness normalized by its maximum and floored at [`EPS_FLOOR`].
pub fn estimate_monte_carlo(
    x: &SnapshotMatrix,
    g: &Graph,
    params: &SirParams,
    k_sims: usize,
    seed: u64,
) -> Result<ProbVector, EstimatorError> {
    normalize(monte_carlo_fitness(x, g, params, k_sims, seed, 0)?)
}

fn normalize(fitness: Vec<f64>) -> Result<ProbVector, EstimatorError> {
    let max = fitness.iter().copied().fold(0.0, f64::max);
    let probs = fitness
        .into_iter()
        .map(|f| if max > 0.0 { (f / max).max(EPS_FLOOR) } else { EPS_FLOOR })
        .collect();
    ProbVector::new(probs)
}

/// Monte Carlo fit using each sample's recorded diffusion rates.
pub struct MonteCarloEstimator {
    graph: Arc<Graph>,
    k_sims: usize,
    seed: u64,
}

impl MonteCarloEstimator {
    pub fn new(graph: Arc<Graph>, k_sims: usize, seed: u64) -> Result<Self, EstimatorError> {
        if k_sims == 0 {
            return Err(EstimatorError::InvalidParameter("k_sims must be at least 1".into()));
        }
        Ok(Self { graph, k_sims, seed })
    }
}

impl SourceEstimator for MonteCarloEstimator {
    fn estimate(&self, sample: &LabeledSample) -> Result<ProbVector, EstimatorError> {
        let steps = *sample.snapshots.times().last().expect("non-empty");
        let params = SirParams::new(sample.params.sigma_inf, sample.params.sigma_rec, steps)?;
        normalize(monte_carlo_fitness(
            &sample.snapshots,
            &self.graph,
            &params,
            self.k_sims,
            self.seed,
            sample.id,
        )?)
    }

    fn name(&self) -> String {
        format!("monte_carlo(k={})", self.k_sims)
    }
}
