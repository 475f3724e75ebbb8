//! CSV reports. Each file starts with one `#` provenance line; floats use
//! the shortest round-trip form and missing values are written as `NA`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{ExperimentError, TrialReport};
use crate::provenance::Provenance;

const NA: &str = "NA";

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), |v| v.to_string())
}

fn open(path: &Path, report: &TrialReport) -> Result<csv::Writer<BufWriter<File>>, ExperimentError> {
    let io_err = |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(file, "{}", Provenance::new(&report.config, report.seed).comment_line()).map_err(io_err)?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(path: &Path, writer: csv::Writer<BufWriter<File>>) -> Result<(), ExperimentError> {
    let io_err = |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    };
    writer
        .into_inner()
        .map_err(|e| io_err(e.into_error()))?
        .flush()
        .map_err(io_err)
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> ExperimentError + '_ {
    move |e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

/// One row per cell and trial.
pub fn write_trials_csv(path: impl AsRef<Path>, report: &TrialReport) -> Result<(), ExperimentError> {
    let path = path.as_ref();
    let mut w = open(path, report)?;
    w.write_record([
        "estimator",
        "score",
        "alpha",
        "beta",
        "trial",
        "inclusion_rate",
        "mean_set_size",
        "q_hat",
        "runtime_s",
    ])
    .map_err(csv_err(path))?;
    for summary in &report.cells {
        let c = &summary.cell;
        for (t, trial) in summary.trials.iter().enumerate() {
            w.write_record([
                c.estimator.clone(),
                c.score.to_string(),
                c.alpha.to_string(),
                c.beta.to_string(),
                t.to_string(),
                trial.inclusion_rate.to_string(),
                trial.mean_set_size.to_string(),
                trial.q_hat.to_string(),
                opt(trial.runtime_s),
            ])
            .map_err(csv_err(path))?;
        }
    }
    finish(path, w)
}

/// One row per cell: inclusion rate and set size as mean and stderr.
pub fn write_summary_csv(path: impl AsRef<Path>, report: &TrialReport) -> Result<(), ExperimentError> {
    let path = path.as_ref();
    let mut w = open(path, report)?;
    w.write_record([
        "estimator",
        "score",
        "alpha",
        "beta",
        "n_trials",
        "inclusion_mean",
        "inclusion_stderr",
        "set_size_mean",
        "set_size_stderr",
        "runtime_s",
    ])
    .map_err(csv_err(path))?;
    for summary in &report.cells {
        let c = &summary.cell;
        w.write_record([
            c.estimator.clone(),
            c.score.to_string(),
            c.alpha.to_string(),
            c.beta.to_string(),
            summary.trials.len().to_string(),
            summary.inclusion.mean.to_string(),
            opt(summary.inclusion.stderr),
            summary.set_size.mean.to_string(),
            opt(summary.set_size.stderr),
            opt(summary.runtime_s),
        ])
        .map_err(csv_err(path))?;
    }
    finish(path, w)
}

/// One row per cell, trial and test sample. Requires a report run with details kept.
pub fn write_detail_csv(path: impl AsRef<Path>, report: &TrialReport) -> Result<(), ExperimentError> {
    let path = path.as_ref();
    let mut w = open(path, report)?;
    w.write_record([
        "estimator",
        "score",
        "alpha",
        "beta",
        "trial",
        "sample_id",
        "set_size",
        "hits",
        "n_sources",
        "included",
    ])
    .map_err(csv_err(path))?;
    for summary in &report.cells {
        let c = &summary.cell;
        for (t, trial) in summary.trials.iter().enumerate() {
            for o in &trial.details {
                w.write_record([
                    c.estimator.clone(),
                    c.score.to_string(),
                    c.alpha.to_string(),
                    c.beta.to_string(),
                    t.to_string(),
                    o.sample_id.to_string(),
                    o.set_size.to_string(),
                    o.hits.to_string(),
                    o.n_sources.to_string(),
                    u8::from(o.included).to_string(),
                ])
                .map_err(csv_err(path))?;
            }
        }
    }
    finish(path, w)
}

#[cfg(test)]
mod tests {
    use super::super::{run_experiment_with, ExperimentConfig, GraphSource};
    use super::*;
    use crate::estimator::EstimatorSpec;

    fn cfg(n_trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            n_cal: 30,
            n_test: 10,
            n_trials,
            alphas: vec![0.1],
            betas: vec![0.3, 0.5],
            graph: GraphSource::Model {
                model: "er:30:0.2".into(),
                seed: 2,
            },
            estimators: vec![EstimatorSpec::Heuristic],
            ..ExperimentConfig::desk_scale()
        }
    }

    #[test]
    fn writes_all_three_reports() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_experiment_with(&cfg(3), true).unwrap();
        let (trials, summary, detail) = (dir.path().join("t.csv"), dir.path().join("s.csv"), dir.path().join("d.csv"));
        write_trials_csv(&trials, &report).unwrap();
        write_summary_csv(&summary, &report).unwrap();
        write_detail_csv(&detail, &report).unwrap();

        let text = std::fs::read_to_string(&trials).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# tool=setcp"));
        assert_eq!(lines[1], "estimator,score,alpha,beta,trial,inclusion_rate,mean_set_size,q_hat,runtime_s");
        assert_eq!(lines.len(), 2 + 3 * 2 * 3);
        assert!(lines[2].ends_with(",NA"));

        let summary = std::fs::read_to_string(&summary).unwrap();
        assert_eq!(summary.lines().count(), 2 + 3 * 2);
        let detail = std::fs::read_to_string(&detail).unwrap();
        assert_eq!(detail.lines().count(), 2 + 3 * 2 * 3 * 10);
    }

    #[test]
    fn single_trial_summary_uses_sentinel() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_experiment_with(&cfg(1), false).unwrap();
        let path = dir.path().join("s.csv");
        write_summary_csv(&path, &report).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
        assert_eq!(row[6], "NA");
        assert_eq!(row[8], "NA");
    }
}
