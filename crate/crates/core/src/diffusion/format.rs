//! Dataset files.
//!
//! The text format is JSON lines. The first line is the header
//!
//! ```text
//! {"dataset":{"tool":"setcp","version":"0.1.0","config_hash":"…","seed":7},"n_nodes":20,"graph":"complete:20"}
//! ```
//!
//! followed by one record per sample:
//!
//! ```text
//! {"id":0,"times":[2,3],"snapshots":["SIIS…","IIRS…"],"sources":[4],
//!  "params":{"sigma_inf":0.25,"sigma_rec":0.0,"r0":null,"t1":2}}
//! ```
//!
//! Each snapshot string has one `S`/`I`/`R` character per node.
//!
//! The binary format is little-endian: magic `SCPD`, `u32` format version,
//! `u32` header length and the header JSON, `u32` record count, then per
//! record `u64 id`, `u32 m`, `m × u32` times, `u32 k`, `k × u32` sources,
//! `f64 sigma_inf`, `f64 sigma_rec`, `f64 r0` (NaN when absent), `u32 t1`
//! and `m × n_nodes` status bytes (S=0, I=1, R=2), snapshot-major.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DiffusionError, LabeledSample, SampleParams, SnapshotMatrix, Status};
use crate::provenance::Provenance;

const MAGIC: &[u8; 4] = b"SCPD";
const BINARY_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub dataset: Provenance,
    pub n_nodes: usize,
    /// Graph model string or edge-list path the samples were simulated on.
    #[serde(default)]
    pub graph: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct Record {
    id: u64,
    times: Vec<usize>,
    snapshots: Vec<String>,
    sources: Vec<usize>,
    params: SampleParams,
}

fn io_err(path: &Path, source: std::io::Error) -> DiffusionError {
    DiffusionError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, record: usize, message: impl Into<String>) -> DiffusionError {
    DiffusionError::Format {
        path: path.to_path_buf(),
        record,
        message: message.into(),
    }
}

fn check_sample(sample: &LabeledSample, n_nodes: usize) -> Result<(), String> {
    if sample.snapshots.n_nodes() != n_nodes {
        return Err(format!(
            "snapshots cover {} nodes, header says {n_nodes}",
            sample.snapshots.n_nodes()
        ));
    }
    if sample.sources.is_empty() {
        return Err("empty source list".into());
    }
    if let Some(v) = sample.sources.iter().find(|&&v| v >= n_nodes) {
        return Err(format!("source {v} out of range"));
    }
    if sample.sources.windows(2).any(|w| w[0] >= w[1]) {
        return Err("sources must be sorted and distinct".into());
    }
    Ok(())
}

pub fn write_dataset(path: impl AsRef<Path>, header: &DatasetHeader, samples: &[LabeledSample]) -> Result<(), DiffusionError> {
    let path = path.as_ref();
    let mut out = Vec::new();
    serde_json::to_writer(&mut out, header).expect("header serializes");
    out.push(b'\n');
    for sample in samples {
        let record = Record {
            id: sample.id,
            times: sample.snapshots.times().to_vec(),
            snapshots: sample
                .snapshots
                .columns()
                .iter()
                .map(|c| c.iter().map(|s| s.as_char()).collect())
                .collect(),
            sources: sample.sources.clone(),
            params: sample.params,
        };
        serde_json::to_writer(&mut out, &record).expect("record serializes");
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<(DatasetHeader, Vec<LabeledSample>), DiffusionError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header_line = lines.next().ok_or_else(|| format_err(path, 0, "missing header line"))?;
    let header: DatasetHeader =
        serde_json::from_str(header_line).map_err(|e| format_err(path, 0, format!("bad header: {e}")))?;
    let mut samples = Vec::new();
    for (idx, line) in lines.enumerate() {
        let record_no = idx + 1;
        let record: Record = serde_json::from_str(line).map_err(|e| format_err(path, record_no, e.to_string()))?;
        let columns = record
            .snapshots
            .iter()
            .map(|s| {
                s.chars()
                    .map(|c| Status::from_char(c).ok_or_else(|| format!("invalid status {c:?}")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|m| format_err(path, record_no, m))?;
        let snapshots = SnapshotMatrix::new(record.times, columns).map_err(|e| format_err(path, record_no, e.to_string()))?;
        let sample = LabeledSample {
            id: record.id,
            snapshots,
            sources: record.sources,
            params: record.params,
        };
        check_sample(&sample, header.n_nodes).map_err(|m| format_err(path, record_no, m))?;
        samples.push(sample);
    }
    Ok((header, samples))
}

pub fn write_dataset_binary(path: impl AsRef<Path>, header: &DatasetHeader, samples: &[LabeledSample]) -> Result<(), DiffusionError> {
    let path = path.as_ref();
    let mut out = Vec::new();
    let header_json = serde_json::to_vec(header).expect("header serializes");
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    out.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_json);
    out.extend_from_slice(&(samples.len() as u32).to_le_bytes());
    for s in samples {
        out.extend_from_slice(&s.id.to_le_bytes());
        out.extend_from_slice(&(s.snapshots.n_snapshots() as u32).to_le_bytes());
        for &t in s.snapshots.times() {
            out.extend_from_slice(&(t as u32).to_le_bytes());
        }
        out.extend_from_slice(&(s.sources.len() as u32).to_le_bytes());
        for &v in &s.sources {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        out.extend_from_slice(&s.params.sigma_inf.to_le_bytes());
        out.extend_from_slice(&s.params.sigma_rec.to_le_bytes());
        out.extend_from_slice(&s.params.r0.unwrap_or(f64::NAN).to_le_bytes());
        out.extend_from_slice(&(s.params.t1 as u32).to_le_bytes());
        for column in s.snapshots.columns() {
            out.extend(column.iter().map(|&st| st as u8));
        }
    }
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(&out).map_err(|e| io_err(path, e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let slice = self.bytes.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(slice)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()))
    }
}

pub fn read_dataset_binary(path: impl AsRef<Path>) -> Result<(DatasetHeader, Vec<LabeledSample>), DiffusionError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };
    let truncated = |record| format_err(path, record, "truncated file");
    if cur.take(4) != Some(MAGIC.as_slice()) {
        return Err(format_err(path, 0, "not a binary dataset (bad magic)"));
    }
    let version = cur.u32().ok_or_else(|| truncated(0))?;
    if version != BINARY_VERSION {
        return Err(format_err(path, 0, format!("unsupported format version {version}")));
    }
    let header_len = cur.u32().ok_or_else(|| truncated(0))? as usize;
    let header_bytes = cur.take(header_len).ok_or_else(|| truncated(0))?;
    let header: DatasetHeader =
        serde_json::from_slice(header_bytes).map_err(|e| format_err(path, 0, format!("bad header: {e}")))?;
    let count = cur.u32().ok_or_else(|| truncated(0))? as usize;
    let n = header.n_nodes;
    let mut samples = Vec::with_capacity(count);
    for record in 1..=count {
        let mut read = || -> Option<LabeledSample> {
            let id = cur.u64()?;
            let m = cur.u32()? as usize;
            let times = (0..m).map(|_| cur.u32().map(|t| t as usize)).collect::<Option<Vec<_>>>()?;
            let k = cur.u32()? as usize;
            let sources = (0..k).map(|_| cur.u32().map(|v| v as usize)).collect::<Option<Vec<_>>>()?;
            let sigma_inf = cur.f64()?;
            let sigma_rec = cur.f64()?;
            let r0 = cur.f64()?;
            let t1 = cur.u32()? as usize;
            let mut columns = Vec::with_capacity(m);
            for _ in 0..m {
                let raw = cur.take(n)?;
                columns.push(raw.iter().map(|&b| Status::from_code(b)).collect::<Option<Vec<_>>>()?);
            }
            let snapshots = SnapshotMatrix::new(times, columns).ok()?;
            Some(LabeledSample {
                id,
                snapshots,
                sources,
                params: SampleParams {
                    sigma_inf,
                    sigma_rec,
                    r0: (!r0.is_nan()).then_some(r0),
                    t1,
                },
            })
        };
        let sample = read().ok_or_else(|| format_err(path, record, "truncated or invalid record"))?;
        check_sample(&sample, n).map_err(|m| format_err(path, record, m))?;
        samples.push(sample);
    }
    Ok((header, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{sample_dataset, DatasetConfig};
    use crate::graph::{generate_graph, GraphModel};

    fn fixture() -> (DatasetHeader, Vec<LabeledSample>) {
        let model = GraphModel::BarabasiAlbert { n: 40, m: 2 };
        let g = generate_graph(model, 1).unwrap();
        let cfg = DatasetConfig::default();
        let samples = sample_dataset(&g, &cfg, 12, 4).unwrap();
        let header = DatasetHeader {
            dataset: Provenance::new("fixture", 4),
            n_nodes: 40,
            graph: Some(model.to_string()),
        };
        (header, samples)
    }

    #[test]
    fn text_and_binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (header, samples) = fixture();
        let text = dir.path().join("d.jsonl");
        write_dataset(&text, &header, &samples).unwrap();
        assert_eq!(read_dataset(&text).unwrap(), (header.clone(), samples.clone()));

        let bin = dir.path().join("d.bin");
        write_dataset_binary(&bin, &header, &samples).unwrap();
        assert_eq!(read_dataset_binary(&bin).unwrap(), (header, samples));
    }

    #[test]
    fn rejects_malformed_records() {
        let dir = tempfile::tempdir().unwrap();
        let (header, samples) = fixture();
        let path = dir.path().join("d.jsonl");
        write_dataset(&path, &header, &samples[..1]).unwrap();
        let text = fs::read_to_string(&path).unwrap();

        let at = text.find("\"snapshots\":[\"").unwrap() + "\"snapshots\":[\"".len();
        let bad_status = format!("{}X{}", &text[..at], &text[at + 1..]);
        fs::write(&path, bad_status).unwrap();
        assert!(matches!(read_dataset(&path), Err(DiffusionError::Format { record: 1, .. })));

        fs::write(&path, "").unwrap();
        assert!(matches!(read_dataset(&path), Err(DiffusionError::Format { record: 0, .. })));

        let bin = dir.path().join("d.bin");
        write_dataset_binary(&bin, &header, &samples).unwrap();
        let bytes = fs::read(&bin).unwrap();
        fs::write(&bin, &bytes[..bytes.len() - 3]).unwrap();
        assert!(read_dataset_binary(&bin).is_err());
    }
}
