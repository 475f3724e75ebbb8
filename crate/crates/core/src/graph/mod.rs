//! Undirected simple graphs with dense `0..n` node ids.

mod generate;
mod io;
mod spectral;

pub use generate::{generate_graph, GraphModel};
pub use io::{load_edge_list, load_edge_list_remapped, save_edge_list, EdgeListLoad, IdMap};
pub use spectral::{spectral_radius, DEFAULT_MAX_ITER, DEFAULT_TOL};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge list contains no edges")]
    EmptyEdgeList,
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("node {node} out of range for graph with {n_nodes} nodes")]
    NodeOutOfRange { node: usize, n_nodes: usize },
    #[error("invalid graph parameter: {0}")]
    InvalidParameter(String),
    #[error("power iteration did not converge in {iterations} iterations (last estimate {last_estimate}, residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        last_estimate: f64,
        residual: f64,
        last_iterate: Vec<f64>,
    },
}

/// An immutable undirected simple graph.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted; neighbor lists are
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, silently dropping self-loops and duplicate edges.
    ///
    /// Returns the graph and the number of dropped input pairs.
    pub fn from_edges<I>(n_nodes: usize, pairs: I) -> Result<(Self, usize), GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n_nodes == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut edges = Vec::new();
        let mut seen = 0usize;
        for (u, v) in pairs {
            seen += 1;
            for node in [u, v] {
                if node >= n_nodes {
                    return Err(GraphError::NodeOutOfRange { node, n_nodes });
                }
            }
            if u != v {
                edges.push((u.min(v), u.max(v)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let dropped = seen - edges.len();

        let mut adjacency = vec![Vec::new(); n_nodes];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok((
            Self {
                n_nodes,
                edges,
                adjacency,
            },
            dropped,
        ))
    }

    pub fn complete(n_nodes: usize) -> Result<Self, GraphError> {
        let pairs = (0..n_nodes).flat_map(|u| (u + 1..n_nodes).map(move |v| (u, v)));
        Self::from_edges(n_nodes, pairs).map(|(g, _)| g)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n_nodes as f64
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n_nodes && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Relabels nodes: node `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, GraphError> {
        if perm.len() != self.n_nodes {
            return Err(GraphError::InvalidParameter(format!(
                "permutation has length {} but graph has {} nodes",
                perm.len(),
                self.n_nodes
            )));
        }
        let pairs = self.edges.iter().map(|&(u, v)| (perm[u], perm[v]));
        Self::from_edges(self.n_nodes, pairs).map(|(g, _)| g)
    }
}
