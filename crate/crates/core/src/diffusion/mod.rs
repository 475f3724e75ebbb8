//! Discrete-time SIR/SI diffusion and snapshot observation.
//!
//! One step reads the statuses at `t-1` and writes `t`:
//!
//! * every node infected at `t-1` makes one independent contact attempt per
//!   susceptible neighbor, succeeding with probability `sigma_inf`, so a
//!   susceptible node with `k` infected neighbors becomes infected with
//!   probability `1 - (1 - sigma_inf)^k`;
//! * every node infected at `t-1` recovers with probability `sigma_rec`.
//!
//! A node infected at `t` cannot recover at `t`. `sigma_rec = 0` gives SI.

mod dataset;
mod format;

pub use dataset::{sample_dataset, DatasetConfig, InfectionDist, T1Rule, UniformRange};
pub use format::{read_dataset, read_dataset_binary, write_dataset, write_dataset_binary, DatasetHeader};

use std::fmt;
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::rng::substream;

pub const DEFAULT_HORIZON: usize = 40;
pub const DEFAULT_WINDOW: usize = 16;

#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error("source set is empty")]
    EmptySources,
    #[error("node {node} out of range for graph with {n_nodes} nodes")]
    NodeOutOfRange { node: usize, n_nodes: usize },
    #[error("invalid diffusion parameter: {0}")]
    InvalidParams(String),
    #[error("observation window t1={t1}, m={m}, stride={stride} ends after horizon {horizon}")]
    WindowExceedsHorizon {
        t1: usize,
        m: usize,
        stride: usize,
        horizon: usize,
    },
    #[error("cannot draw {requested} sources from {n_nodes} nodes")]
    TooManySources { requested: usize, n_nodes: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: record {record}: {message}")]
    Format {
        path: PathBuf,
        record: usize,
        message: String,
    },
}

/// Compartment of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Status {
    S = 0,
    I = 1,
    R = 2,
}

impl Status {
    pub fn as_char(self) -> char {
        match self {
            Self::S => 'S',
            Self::I => 'I',
            Self::R => 'R',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'S' => Some(Self::S),
            'I' => Some(Self::I),
            'R' => Some(Self::R),
            _ => None,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::S),
            1 => Some(Self::I),
            2 => Some(Self::R),
            _ => None,
        }
    }

    /// Infected now or at some earlier time.
    pub fn ever_infected(self) -> bool {
        self != Self::S
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Infection and recovery probabilities plus the simulated horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirParams {
    pub sigma_inf: f64,
    pub sigma_rec: f64,
    pub horizon: usize,
    /// Set when `sigma_inf` was derived from a reproduction number.
    pub r0: Option<f64>,
}

impl SirParams {
    pub fn new(sigma_inf: f64, sigma_rec: f64, horizon: usize) -> Result<Self, DiffusionError> {
        let params = Self {
            sigma_inf,
            sigma_rec,
            horizon,
            r0: None,
        };
        params.validate()?;
        Ok(params)
    }

    /// Derives `sigma_inf = r0 * sigma_rec / lambda1`.
    pub fn from_r0(r0: f64, sigma_rec: f64, lambda1: f64, horizon: usize) -> Result<Self, DiffusionError> {
        if !(lambda1 > 0.0) {
            return Err(DiffusionError::InvalidParams(format!(
                "R0 needs a positive spectral radius, got {lambda1}"
            )));
        }
        let params = Self {
            sigma_inf: r0 * sigma_rec / lambda1,
            sigma_rec,
            horizon,
            r0: Some(r0),
        };
        params.validate().map_err(|_| {
            DiffusionError::InvalidParams(format!(
                "R0={r0}, sigma_rec={sigma_rec}, lambda1={lambda1} gives sigma_inf={} outside (0, 1]",
                params.sigma_inf
            ))
        })?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), DiffusionError> {
        if !(self.sigma_inf > 0.0 && self.sigma_inf <= 1.0) {
            return Err(DiffusionError::InvalidParams(format!(
                "sigma_inf must lie in (0, 1], got {}",
                self.sigma_inf
            )));
        }
        if !(self.sigma_rec >= 0.0 && self.sigma_rec < 1.0) {
            return Err(DiffusionError::InvalidParams(format!(
                "sigma_rec must lie in [0, 1), got {}",
                self.sigma_rec
            )));
        }
        Ok(())
    }
}

/// Statuses at `t = 0..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    statuses: Vec<Vec<Status>>,
    sources: Vec<usize>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.statuses.len() - 1
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn at(&self, t: usize) -> &[Status] {
        &self.statuses[t]
    }

    pub fn n_nodes(&self) -> usize {
        self.statuses[0].len()
    }
}

/// Observed statuses, one column per observation time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotMatrix {
    times: Vec<usize>,
    columns: Vec<Vec<Status>>,
}

impl SnapshotMatrix {
    /// Checks shape, strictly increasing times and per-node monotonicity.
    pub fn new(times: Vec<usize>, columns: Vec<Vec<Status>>) -> Result<Self, DiffusionError> {
        let invalid = |msg: String| Err(DiffusionError::InvalidParams(msg));
        if times.is_empty() || times.len() != columns.len() {
            return invalid(format!("{} times for {} snapshot columns", times.len(), columns.len()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!("observation times must increase strictly: {times:?}"));
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return invalid("snapshot columns differ in length".into());
        }
        for pair in columns.windows(2) {
            if let Some(v) = (0..n).find(|&v| pair[1][v] < pair[0][v]) {
                return invalid(format!("node {v} goes {} -> {} between snapshots", pair[0][v], pair[1][v]));
            }
        }
        Ok(Self { times, columns })
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn n_snapshots(&self) -> usize {
        self.columns.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.columns[0].len()
    }

    pub fn column(&self, j: usize) -> &[Status] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<Status>] {
        &self.columns
    }

    /// First column in which `v` is infected or recovered.
    pub fn first_seen(&self, v: usize) -> Option<usize> {
        self.columns.iter().position(|c| c[v].ever_infected())
    }
}

/// Generative parameters recorded with every sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleParams {
    pub sigma_inf: f64,
    pub sigma_rec: f64,
    pub r0: Option<f64>,
    pub t1: usize,
}

/// Snapshots together with the true source set (sorted ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub id: u64,
    pub snapshots: SnapshotMatrix,
    pub sources: Vec<usize>,
    pub params: SampleParams,
}

fn check_sources(g: &Graph, sources: &[usize]) -> Result<Vec<usize>, DiffusionError> {
    if sources.is_empty() {
        return Err(DiffusionError::EmptySources);
    }
    if let Some(&node) = sources.iter().find(|&&v| v >= g.n_nodes()) {
        return Err(DiffusionError::NodeOutOfRange {
            node,
            n_nodes: g.n_nodes(),
        });
    }
    let mut sorted = sources.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(sorted)
}

/// Runs `steps` synchronous steps drawing from `rng`.
pub fn simulate_with_rng<R: Rng + ?Sized>(
    g: &Graph,
    sigma_inf: f64,
    sigma_rec: f64,
    sources: &[usize],
    steps: usize,
    rng: &mut R,
) -> Result<Trajectory, DiffusionError> {
    let sources = check_sources(g, sources)?;
    let n = g.n_nodes();
    let mut initial = vec![Status::S; n];
    for &v in &sources {
        initial[v] = Status::I;
    }
    let mut statuses = Vec::with_capacity(steps + 1);
    statuses.push(initial);
    for _ in 0..steps {
        let prev = statuses.last().expect("non-empty");
        let mut next = prev.clone();
        for u in 0..n {
            if prev[u] != Status::I {
                continue;
            }
            for &v in g.neighbors(u) {
                if prev[v] == Status::S && next[v] == Status::S && rng.gen_bool(sigma_inf) {
                    next[v] = Status::I;
                }
            }
            if sigma_rec > 0.0 && rng.gen_bool(sigma_rec) {
                next[u] = Status::R;
            }
        }
        statuses.push(next);
    }
    Ok(Trajectory { statuses, sources })
}

/// Simulates `params.horizon` steps from `sources`; pure in `(inputs, seed)`.
pub fn simulate(g: &Graph, params: &SirParams, sources: &[usize], seed: u64) -> Result<Trajectory, DiffusionError> {
    params.validate()?;
    let mut rng = substream(seed, &[]);
    simulate_with_rng(g, params.sigma_inf, params.sigma_rec, sources, params.horizon, &mut rng)
}

/// Columns at `t1, t1 + stride, ..., t1 + (m-1) stride`.
pub fn observe(traj: &Trajectory, t1: usize, m: usize, stride: usize) -> Result<SnapshotMatrix, DiffusionError> {
    if t1 < 1 || m < 1 || stride < 1 {
        return Err(DiffusionError::InvalidParams(format!(
            "need t1 >= 1, m >= 1, stride >= 1; got t1={t1}, m={m}, stride={stride}"
        )));
    }
    let last = t1 + (m - 1) * stride;
    if last > traj.horizon() {
        return Err(DiffusionError::WindowExceedsHorizon {
            t1,
            m,
            stride,
            horizon: traj.horizon(),
        });
    }
    let times: Vec<usize> = (0..m).map(|j| t1 + j * stride).collect();
    let columns = times.iter().map(|&t| traj.at(t).to_vec()).collect();
    Ok(SnapshotMatrix { times, columns })
}
