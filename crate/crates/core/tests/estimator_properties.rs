use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;
use setcp::conformal::{calibrate, predict, NominalLevels, ScoreKind};
use setcp::diffusion::{
    sample_dataset, DatasetConfig, InfectionDist, LabeledSample, SampleParams, SnapshotMatrix, Status, UniformRange,
};
use setcp::estimator::{
    estimate_heuristic, estimate_oracle, EstimatorSpec, HeuristicWeights, MonteCarloEstimator, ProbVector,
    SourceEstimator, EPS_FLOOR,
};
use setcp::graph::{generate_graph, Graph, GraphModel};
use setcp::rng::substream;

fn single_source_cfg() -> DatasetConfig {
    DatasetConfig {
        n_sources: UniformRange::point(1),
        ..DatasetConfig::default()
    }
}

fn in_top_decile(pi: &ProbVector, v: usize) -> bool {
    // strictly-greater count, so ties do not push the source down
    let above = pi.as_slice().iter().filter(|&&p| p > pi[v]).count();
    above < pi.len() / 10
}

#[test]
fn heuristic_beats_random_scorer_on_single_sources() {
    let g = generate_graph(GraphModel::BarabasiAlbert { n: 200, m: 3 }, 1).unwrap();
    let samples = sample_dataset(&g, &single_source_cfg(), 500, 42).unwrap();
    let mut rng = substream(42, &[7]);
    let (mut heuristic, mut random) = (0, 0);
    for s in &samples {
        let pi = estimate_heuristic(&s.snapshots, &g, &HeuristicWeights::default()).unwrap();
        heuristic += usize::from(in_top_decile(&pi, s.sources[0]));
        let noise = ProbVector::new((0..200).map(|_| rng.gen::<f64>()).collect()).unwrap();
        random += usize::from(in_top_decile(&noise, s.sources[0]));
    }
    assert!(heuristic > random, "heuristic {heuristic} vs random {random}");
}

fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn monte_carlo_is_stable_across_seeds() {
    let g = Arc::new(generate_graph(GraphModel::BarabasiAlbert { n: 50, m: 2 }, 3).unwrap());
    let cfg = DatasetConfig {
        n_sources: UniformRange { lo: 1, hi: 3 },
        ..DatasetConfig::default()
    };
    let samples = sample_dataset(&g, &cfg, 5, 11).unwrap();
    let a = MonteCarloEstimator::new(Arc::clone(&g), 200, 1).unwrap();
    let b = MonteCarloEstimator::new(Arc::clone(&g), 200, 2).unwrap();
    for s in &samples {
        let (pa, pb) = (a.estimate(s).unwrap(), b.estimate(s).unwrap());
        let rho = spearman(pa.as_slice(), pb.as_slice());
        assert!(rho > 0.8, "sample {}: spearman {rho}", s.id);
        assert_eq!(pa, a.estimate(s).unwrap());
    }
}

fn arb_sample(n: usize) -> impl Strategy<Value = LabeledSample> {
    (
        proptest::collection::vec(proptest::collection::vec(0u8..3, n), 1..5),
        proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=3),
        0.01f64..1.0,
        0.0f64..0.9,
        any::<u64>(),
    )
        .prop_map(move |(cols, sources, si, sr, id)| {
            let times: Vec<usize> = (1..=cols.len()).collect();
            // running maximum per node keeps every status sequence monotone
            let mut columns: Vec<Vec<Status>> = Vec::new();
            for c in cols {
                let col = c
                    .into_iter()
                    .enumerate()
                    .map(|(v, b)| {
                        let s = Status::from_code(b).unwrap();
                        columns.last().map_or(s, |prev: &Vec<Status>| s.max(prev[v]))
                    })
                    .collect();
                columns.push(col);
            }
            LabeledSample {
                id,
                snapshots: SnapshotMatrix::new(times, columns).unwrap(),
                sources,
                params: SampleParams {
                    sigma_inf: si,
                    sigma_rec: sr,
                    r0: None,
                    t1: 1,
                },
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_estimator_returns_valid_probabilities(sample in arb_sample(12), noise in 0.0f64..=1.0) {
        let g = Arc::new(generate_graph(GraphModel::ErdosRenyi { n: 12, p: 0.3 }, 5).unwrap());
        let specs = [
            EstimatorSpec::Heuristic,
            EstimatorSpec::MonteCarlo { k_sims: 4, seed: 3 },
            EstimatorSpec::Oracle { noise, seed: 3 },
        ];
        for spec in specs {
            let est = spec.build(Arc::clone(&g)).unwrap();
            let pi = est.estimate(&sample).unwrap();
            prop_assert_eq!(pi.len(), 12);
            prop_assert!(pi.as_slice().iter().all(|p| (0.0..=1.0).contains(p)));
            prop_assert!(pi.as_slice().iter().any(|&p| p > 0.0));
            prop_assert_eq!(&pi, &est.estimate(&sample).unwrap());
        }
        let h = estimate_heuristic(&sample.snapshots, &g, &HeuristicWeights::default()).unwrap();
        for v in 0..12 {
            if sample.snapshots.first_seen(v).is_none() {
                prop_assert_eq!(h[v], EPS_FLOOR);
            }
        }
    }
}

/// Mean prediction-set size of the `min` score at alpha = 0.1, beta = 0 for
/// each oracle noise level, plus the mean source count of the test samples.
fn oracle_set_sizes(noises: &[f64]) -> (Vec<f64>, f64) {
    let g = generate_graph(GraphModel::BarabasiAlbert { n: 100, m: 3 }, 2).unwrap();
    let cfg = DatasetConfig {
        infection: InfectionDist::R0(UniformRange { lo: 1.0, hi: 15.0 }),
        n_sources: UniformRange { lo: 1, hi: 8 },
        ..DatasetConfig::default()
    };
    let cal = sample_dataset(&g, &cfg, 300, 1).unwrap();
    let test = sample_dataset(&g, &cfg, 100, 2).unwrap();
    let levels = NominalLevels::new(0.1, 0.0).unwrap();
    let mean_sources = test.iter().map(|s| s.sources.len() as f64).sum::<f64>() / test.len() as f64;
    let sizes = noises
        .iter()
        .map(|&noise| {
            let pairs: Vec<_> = cal
                .iter()
                .map(|s| (estimate_oracle(s, noise, 5).unwrap(), s.sources.clone()))
                .collect();
            let model = calibrate(&pairs, ScoreKind::Min, levels).unwrap();
            test.iter()
                .map(|s| predict(&model, &estimate_oracle(s, noise, 5).unwrap()).len() as f64)
                .sum::<f64>()
                / test.len() as f64
        })
        .collect();
    (sizes, mean_sources)
}

// The perfect oracle is excluded from the ordering: its calibration scores
// all tie, so it covers every test sample and returns exactly Y, while a
// noise-0.5 oracle covers about 1 - alpha of them with subsets of Y.
#[test]
fn oracle_noise_orders_set_sizes() {
    let (sizes, mean_sources) = oracle_set_sizes(&[0.0, 0.5, 0.75, 1.0]);
    assert_eq!(sizes[0], mean_sources);
    assert!(sizes[1] <= sizes[2] && sizes[2] <= sizes[3], "{sizes:?}");
    assert!(sizes[0] < sizes[3]);
}

#[test]
fn perfect_oracle_recovers_the_source_set() {
    let g = generate_graph(GraphModel::ErdosRenyi { n: 60, p: 0.1 }, 8).unwrap();
    let cfg = DatasetConfig {
        n_sources: UniformRange { lo: 1, hi: 6 },
        ..DatasetConfig::default()
    };
    let cal = sample_dataset(&g, &cfg, 100, 3).unwrap();
    let test = sample_dataset(&g, &cfg, 30, 4).unwrap();
    for beta in [0.0, 0.3, 0.7] {
        let pairs: Vec<_> = cal.iter().map(|s| (estimate_oracle(s, 0.0, 0).unwrap(), s.sources.clone())).collect();
        let model = calibrate(&pairs, ScoreKind::Min, NominalLevels::new(0.1, beta).unwrap()).unwrap();
        for s in &test {
            assert_eq!(predict(&model, &estimate_oracle(s, 0.0, 0).unwrap()).nodes, s.sources);
        }
    }
}

#[test]
fn graph_unused_by_oracle() {
    // the oracle builds without looking at the graph
    let empty = Arc::new(Graph::from_edges(3, []).unwrap().0);
    assert!(EstimatorSpec::Oracle { noise: 0.2, seed: 0 }.build(empty).is_ok());
}
