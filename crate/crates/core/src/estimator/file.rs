//! Precomputed probabilities, e.g. exported from a neural network.
//!
//! CSV with optional `#` comment lines, a header row
//! `sample_id,p0,p1,...,p{N-1}` and one row of N values in `[0, 1]` per
//! sample.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use super::{EstimatorError, ProbVector, SourceEstimator};
use crate::diffusion::LabeledSample;
use crate::provenance::Provenance;

pub struct FileEstimator {
    path: PathBuf,
    rows: HashMap<u64, ProbVector>,
}

impl FileEstimator {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EstimatorError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| EstimatorError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |line: u64, message: String| EstimatorError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
        let width = reader
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .len();
        if width < 2 {
            return Err(parse_err(1, "expected header sample_id,p0,...".into()));
        }
        let mut rows = HashMap::new();
        for record in reader.records() {
            let record = record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            let id: u64 = record[0]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad sample id {:?}", &record[0])))?;
            let probs = record
                .iter()
                .skip(1)
                .map(|t| t.trim().parse::<f64>().map_err(|_| parse_err(line, format!("bad probability {t:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let pi = ProbVector::new(probs).map_err(|e| parse_err(line, e.to_string()))?;
            if rows.insert(id, pi).is_some() {
                return Err(parse_err(line, format!("duplicate sample id {id}")));
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl SourceEstimator for FileEstimator {
    fn estimate(&self, sample: &LabeledSample) -> Result<ProbVector, EstimatorError> {
        let pi = self.rows.get(&sample.id).ok_or(EstimatorError::MissingSample(sample.id))?;
        if pi.len() != sample.snapshots.n_nodes() {
            return Err(EstimatorError::SizeMismatch {
                expected: pi.len(),
                got: sample.snapshots.n_nodes(),
            });
        }
        Ok(pi.clone())
    }

    fn name(&self) -> String {
        format!("file({})", self.path.display())
    }
}

/// Writes rows in the format read by [`FileEstimator`].
pub fn write_prob_file(path: impl AsRef<Path>, provenance: &Provenance, rows: &[(u64, ProbVector)]) -> Result<(), EstimatorError> {
    let path = path.as_ref();
    let io_err = |source| EstimatorError::Io {
        path: path.to_path_buf(),
        source,
    };
    let n = rows.first().map_or(0, |(_, pi)| pi.len());
    let mut out = format!("{}\nsample_id", provenance.comment_line());
    for v in 0..n {
        out.push_str(&format!(",p{v}"));
    }
    out.push('\n');
    for (id, pi) in rows {
        out.push_str(&id.to_string());
        for p in pi.as_slice() {
            out.push_str(&format!(",{p}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(io_err)
}
