use setcp::conformal::ScoreKind;
use setcp::diffusion::UniformRange;
use setcp::estimator::EstimatorSpec;
use setcp::experiment::{run_experiment, ExperimentConfig, ExperimentContext, GraphSource};
use setcp::rng::derive_seed;

fn small() -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        n_cal: 200,
        n_test: 100,
        n_trials: 20,
        alphas: vec![0.1],
        betas: vec![0.3],
        graph: GraphSource::Model {
            model: "ba:80:3".into(),
            seed: 6,
        },
        estimators: vec![EstimatorSpec::Heuristic],
        ..ExperimentConfig::desk_scale()
    };
    cfg.dataset.n_sources = UniformRange { lo: 1, hi: 6 };
    cfg
}

/// Included test samples over all trials when splitting with `split_salt`.
fn included_counts(ctx: &ExperimentContext, split_salt: u64) -> Vec<usize> {
    let mut counts = vec![0; ctx.cells().len()];
    for t in 0..ctx.cfg.n_trials {
        let (pool, split) = ctx.trial_seeds(t);
        for (c, r) in counts.iter_mut().zip(ctx.run_trial(pool, derive_seed(split, &[split_salt]), false).unwrap()) {
            *c += (r.inclusion_rate * ctx.cfg.n_test as f64).round() as usize;
        }
    }
    counts
}

#[test]
fn split_permutation_does_not_shift_inclusion() {
    let ctx = ExperimentContext::new(small()).unwrap();
    let n = (ctx.cfg.n_trials * ctx.cfg.n_test) as f64;
    let (a, b) = (included_counts(&ctx, 1), included_counts(&ctx, 2));
    for (i, (&x, &y)) in a.iter().zip(&b).enumerate() {
        let (p1, p2) = (x as f64 / n, y as f64 / n);
        let pooled = (x + y) as f64 / (2.0 * n);
        let se = (pooled * (1.0 - pooled) * 2.0 / n).sqrt();
        let z = if se == 0.0 { 0.0 } else { (p1 - p2) / se };
        assert!(z.abs() <= 3.0, "cell {i}: {p1} vs {p2}, z = {z}");
    }
}

#[test]
fn small_experiment_covers() {
    let report = run_experiment(&small()).unwrap();
    for c in &report.cells {
        assert!(c.inclusion.upper(3.0) >= 0.9, "{:?}: {:?}", c.cell, c.inclusion);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = ExperimentConfig {
        n_trials: 4,
        estimators: vec![EstimatorSpec::Heuristic, EstimatorSpec::MonteCarlo { k_sims: 2, seed: 1 }],
        ..small()
    };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| run_experiment(&cfg)).unwrap();
    let b = four.install(|| run_experiment(&cfg)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn uninformative_oracle_still_covers_at_every_beta() {
    let cfg = ExperimentConfig {
        betas: vec![0.1, 0.5, 0.7],
        estimators: vec![EstimatorSpec::Oracle { noise: 1.0, seed: 4 }],
        ..small()
    };
    let report = run_experiment(&cfg).unwrap();
    for score in ScoreKind::ALL {
        for beta in [0.1, 0.5, 0.7] {
            let c = report.find("oracle(noise=1)", score, 0.1, beta).unwrap();
            assert!(c.inclusion.mean >= 0.9 - 3.0 * c.inclusion.stderr.unwrap(), "{score} {beta}: {:?}", c.inclusion);
        }
    }
}
