use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::conformal::{NominalLevels, ScoreKind};
use crate::diffusion::{DatasetConfig, UniformRange};
use crate::estimator::EstimatorSpec;
use crate::graph::{generate_graph, load_edge_list, Graph, GraphModel};

/// Where the experiment graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    /// `model = "ba:200:3"`, `seed = 1`
    Model { model: String, seed: u64 },
    /// `edge_list = "graphs/highschool.txt"`
    EdgeList { edge_list: PathBuf },
}

impl GraphSource {
    pub fn build(&self) -> Result<Graph, ExperimentError> {
        Ok(match self {
            Self::Model { model, seed } => generate_graph(model.parse::<GraphModel>()?, *seed)?,
            Self::EdgeList { edge_list } => load_edge_list(edge_list)?.graph,
        })
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Model { model, seed } => format!("{model}@{seed}"),
            Self::EdgeList { edge_list } => edge_list.display().to_string(),
        }
    }
}

/// Experiment configuration file (TOML).
///
/// ```toml
/// seed = 2024
/// n_cal = 500
/// n_test = 200
/// n_trials = 100
/// alphas = [0.05, 0.1, 0.15]
/// betas = [0.1, 0.3, 0.5, 0.7]
/// scores = ["pre", "rec", "min"]
///
/// [graph]
/// model = "ba:200:3"
/// seed = 1
///
/// [dataset]
/// infection = { r0 = { lo = 1.0, hi = 15.0 } }
/// sigma_rec = { lo = 0.1, hi = 0.4 }
/// n_sources = { lo = 1, hi = 10 }
/// t1 = "protocol"
/// window = 16
/// stride = 1
/// horizon = 40
///
/// [[estimators]]
/// kind = "oracle"
/// noise = 1.0
/// seed = 0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n_cal: usize,
    pub n_test: usize,
    pub n_trials: usize,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub scores: Vec<ScoreKind>,
    /// Fill the runtime column; off by default so reports are byte-reproducible.
    #[serde(default)]
    pub record_timings: bool,
    pub graph: GraphSource,
    pub dataset: DatasetConfig,
    pub estimators: Vec<EstimatorSpec>,
}

impl ExperimentConfig {
    /// 500 calibration / 200 test samples, 100 trials on a 200-node
    /// preferential-attachment graph with 1 to 10 sources.
    pub fn desk_scale() -> Self {
        Self {
            seed: 2024,
            n_cal: 500,
            n_test: 200,
            n_trials: 100,
            alphas: vec![0.05, 0.1, 0.15],
            betas: vec![0.1, 0.3, 0.5, 0.7],
            scores: ScoreKind::ALL.to_vec(),
            record_timings: false,
            graph: GraphSource::Model {
                model: "ba:200:3".into(),
                seed: 1,
            },
            dataset: DatasetConfig {
                n_sources: UniformRange { lo: 1, hi: 10 },
                ..DatasetConfig::default()
            },
            estimators: vec![
                EstimatorSpec::Heuristic,
                EstimatorSpec::MonteCarlo { k_sims: 3, seed: 0 },
                EstimatorSpec::Oracle { noise: 1.0, seed: 0 },
            ],
        }
    }

    /// 7600 calibration / 400 test samples over 50 random splits.
    pub fn full_scale() -> Self {
        Self {
            n_cal: 7600,
            n_test: 400,
            n_trials: 50,
            dataset: DatasetConfig::default(),
            ..Self::desk_scale()
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: Self = toml::from_str(&text).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML rendering, hashed into report headers.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.n_cal < 1 {
            return bad("n_cal must be at least 1".into());
        }
        if self.n_test < 1 {
            return bad("n_test must be at least 1".into());
        }
        if self.n_trials < 1 {
            return bad("n_trials must be at least 1".into());
        }
        if self.alphas.is_empty() || self.betas.is_empty() {
            return bad("alphas and betas must be non-empty".into());
        }
        for &alpha in &self.alphas {
            for &beta in &self.betas {
                NominalLevels::new(alpha, beta).map_err(|e| ExperimentError::Config(e.to_string()))?;
            }
        }
        if self.scores.is_empty() {
            return bad("scores must be non-empty".into());
        }
        if self.estimators.is_empty() {
            return bad("estimators must be non-empty".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        ExperimentConfig::desk_scale().validate().unwrap();
        let full = ExperimentConfig::full_scale();
        full.validate().unwrap();
        assert_eq!((full.n_cal, full.n_test, full.n_trials), (7600, 400, 50));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::desk_scale();
        let back: ExperimentConfig = toml::from_str(&cfg.canonical()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn parses_documented_example() {
        let text = r#"
seed = 2024
n_cal = 500
n_test = 200
n_trials = 100
alphas = [0.05, 0.1, 0.15]
betas = [0.1, 0.3, 0.5, 0.7]
scores = ["pre", "rec", "min"]

[graph]
model = "ba:200:3"
seed = 1

[dataset]
infection = { r0 = { lo = 1.0, hi = 15.0 } }
sigma_rec = { lo = 0.1, hi = 0.4 }
n_sources = { lo = 1, hi = 10 }
t1 = "protocol"
window = 16
stride = 1
horizon = 40

[[estimators]]
kind = "oracle"
noise = 1.0
seed = 0
"#;
        let cfg: ExperimentConfig = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.estimators, vec![EstimatorSpec::Oracle { noise: 1.0, seed: 0 }]);
        assert_eq!(cfg.graph.build().unwrap().n_nodes(), 200);
    }

    #[test]
    fn validation_names_the_field() {
        let mut cfg = ExperimentConfig::desk_scale();
        cfg.n_trials = 0;
        assert!(cfg.validate().unwrap_err().to_string().contains("n_trials"));
        let mut cfg = ExperimentConfig::desk_scale();
        cfg.betas.push(1.0);
        assert!(cfg.validate().unwrap_err().to_string().contains("beta"));
        let mut cfg = ExperimentConfig::desk_scale();
        cfg.estimators.clear();
        assert!(cfg.validate().unwrap_err().to_string().contains("estimators"));
    }
}
