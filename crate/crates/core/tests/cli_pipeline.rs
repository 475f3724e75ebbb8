use std::path::Path;
use std::process::{Command, Output};

use setcp::conformal::{calibrate, evaluate_set, predict, NominalLevels, ScoreKind};
use setcp::diffusion::{read_dataset, Status};
use setcp::estimator::{estimate_heuristic, HeuristicWeights};
use setcp::graph::{generate_graph, GraphModel};

fn setcp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_setcp"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = setcp(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn field(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {stdout}"))
        .parse()
        .unwrap()
}

#[test]
fn si_simulation_writes_ten_records_without_recoveries() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "simulate", "--graph", "complete:20", "--sigma-inf", "0.25", "--sigma-rec", "0", "--sources", "1",
            "--samples", "10", "--seed", "7", "--out", "d.jsonl",
        ],
    );
    let (header, samples) = read_dataset(dir.path().join("d.jsonl")).unwrap();
    assert_eq!(header.n_nodes, 20);
    assert_eq!(samples.len(), 10);
    for s in &samples {
        assert_eq!(s.sources.len(), 1);
        assert!(s.snapshots.columns().iter().flatten().all(|&st| st != Status::R));
    }
}

const SIM: [&str; 10] = ["simulate", "--graph", "ba:120:3@5", "--r0", "2-10", "--sources", "1-6", "--seed", "5", "--samples"];

#[test]
fn pipeline_matches_library_computation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &[&SIM[..], &["300", "--out", "cal.jsonl"]].concat());
    let mut test_sim = SIM;
    test_sim[8] = "6";
    ok(d, &[&test_sim[..], &["80", "--out", "test.jsonl"]].concat());
    ok(d, &["calibrate", "--data", "cal.jsonl", "--score", "rec", "--alpha", "0.1", "--beta", "0.3", "--out", "model.txt"]);
    ok(d, &["predict", "--model", "model.txt", "--sample", "test.jsonl", "--out", "sets.jsonl"]);
    let eval = ok(d, &["evaluate", "--sets", "sets.jsonl", "--data", "test.jsonl"]);

    let g = generate_graph(GraphModel::BarabasiAlbert { n: 120, m: 3 }, 5).unwrap();
    let w = HeuristicWeights::default();
    let (_, cal) = read_dataset(d.join("cal.jsonl")).unwrap();
    let (_, test) = read_dataset(d.join("test.jsonl")).unwrap();
    let pairs: Vec<_> = cal
        .iter()
        .map(|s| (estimate_heuristic(&s.snapshots, &g, &w).unwrap(), s.sources.clone()))
        .collect();
    let model = calibrate(&pairs, ScoreKind::Rec, NominalLevels::new(0.1, 0.3).unwrap()).unwrap();
    let (mut included, mut size) = (0usize, 0.0);
    for s in &test {
        let set = predict(&model, &estimate_heuristic(&s.snapshots, &g, &w).unwrap());
        included += usize::from(evaluate_set(&set, &s.sources, 0.3).unwrap().included);
        size += set.len() as f64;
    }
    let n = test.len() as f64;
    assert_eq!(field(&eval, "n"), n);
    assert!(included > 0 && size > 0.0);
    assert_eq!(field(&eval, "inclusion_rate").to_bits(), (included as f64 / n).to_bits());
    assert_eq!(field(&eval, "mean_set_size").to_bits(), (size / n).to_bits());
}

#[test]
fn repeated_runs_and_thread_counts_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut files = Vec::new();
    for (tag, threads) in [("a", "1"), ("b", "3"), ("c", "3")] {
        let data = format!("{tag}.jsonl");
        let model = format!("{tag}.model");
        let sets = format!("{tag}.sets");
        let reports = format!("{tag}-reports");
        ok(d, &[&SIM[..], &["60", "--threads", threads, "--out", &data]].concat());
        ok(
            d,
            &["calibrate", "--data", &data, "--score", "min", "--alpha", "0.2", "--estimator", "mc:2", "--out", &model, "--threads", threads],
        );
        ok(d, &["predict", "--model", &model, "--data", &data, "--out", &sets, "--threads", threads]);
        ok(
            d,
            &[
                "sweep", "--axis", "alpha", "--values", "0.1,0.2", "--trials", "3", "--n-cal", "40", "--n-test", "20", "--estimator",
                "heuristic", "--estimator", "mc:1", "--detail", "--out-dir", &reports, "--threads", threads,
            ],
        );
        let mut bytes = vec![
            std::fs::read(d.join(&data)).unwrap(),
            std::fs::read(d.join(&model)).unwrap(),
            std::fs::read(d.join(&sets)).unwrap(),
        ];
        let mut names: Vec<_> = std::fs::read_dir(d.join(&reports)).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        assert!(!names.is_empty());
        bytes.extend(names.iter().map(|p| std::fs::read(p).unwrap()));
        files.push(bytes);
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[1], files[2]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(setcp(d, &["--help"]).status.code(), Some(0));
    assert_eq!(setcp(d, &["simulate", "--bogus"]).status.code(), Some(1));
    assert_eq!(setcp(d, &["calibrate", "--data", "missing.jsonl", "--score", "rec", "--alpha", "0.1", "--out", "m"]).status.code(), Some(1));

    ok(d, &[&SIM[..], &["20", "--out", "d.jsonl"]].concat());
    let bad_score = setcp(d, &["calibrate", "--data", "d.jsonl", "--score", "median", "--alpha", "0.1", "--out", "m"]);
    assert_eq!(bad_score.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_score.stderr).contains("--score"));
    let bad_alpha = setcp(d, &["calibrate", "--data", "d.jsonl", "--score", "rec", "--alpha", "1.5", "--out", "m"]);
    assert_eq!(bad_alpha.status.code(), Some(1));

    let unwritable = setcp(d, &["calibrate", "--data", "d.jsonl", "--score", "rec", "--alpha", "0.1", "--out", "no/such/dir/m"]);
    assert_eq!(unwritable.status.code(), Some(2));
}

#[test]
fn oracle_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["oracle-check", "--n", "10", "--trials", "200", "--seed", "3"]);
    assert_eq!(out.matches(" 0 mismatches").count(), 2, "{out}");
}
