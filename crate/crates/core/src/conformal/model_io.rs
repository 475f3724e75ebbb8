//! Calibrated model files (TOML):
//!
//! ```text
//! # tool=setcp version=0.1.0 config_hash=… seed=7
//! score_kind = "rec"
//! alpha = 0.1
//! beta = 0.3
//! q_hat = inf
//! n_cal = 500
//! estimator = "heuristic"
//! ```
//!
//! Floats are written in shortest round-trip form, so `q_hat` reloads to the
//! exact calibration score.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ConformalError, ConformalModel, NominalLevels, ScoreKind};
use crate::provenance::Provenance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub score_kind: ScoreKind,
    pub alpha: f64,
    pub beta: f64,
    pub q_hat: f64,
    pub n_cal: usize,
    /// Estimator used during calibration; prediction should use the same one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
}

impl ModelFile {
    pub fn from_model(model: &ConformalModel, estimator: Option<String>) -> Self {
        Self {
            score_kind: model.score,
            alpha: model.levels.alpha(),
            beta: model.levels.beta(),
            q_hat: model.q_hat,
            n_cal: model.n_cal,
            estimator,
        }
    }

    pub fn to_model(&self) -> Result<ConformalModel, ConformalError> {
        if self.n_cal == 0 {
            return Err(ConformalError::EmptyCalibration);
        }
        if self.q_hat.is_nan() || self.q_hat == f64::NEG_INFINITY {
            return Err(ConformalError::InvalidLevels(format!("q_hat must be finite or inf, got {}", self.q_hat)));
        }
        Ok(ConformalModel {
            score: self.score_kind,
            levels: NominalLevels::new(self.alpha, self.beta)?,
            q_hat: self.q_hat,
            n_cal: self.n_cal,
        })
    }
}

pub fn write_model(path: impl AsRef<Path>, provenance: &Provenance, model: &ModelFile) -> Result<(), ConformalError> {
    let path = path.as_ref();
    let body = toml::to_string(model).map_err(|e| ConformalError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    fs::write(path, format!("{}\n{body}", provenance.comment_line())).map_err(|source| ConformalError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelFile, ConformalError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConformalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let model: ModelFile = toml::from_str(&text).map_err(|e| ConformalError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    model.to_model().map_err(|e| ConformalError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(model)
}
