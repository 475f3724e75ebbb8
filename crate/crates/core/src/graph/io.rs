//! Edge-list text format.
//!
//! ```text
//! # nodes: 5        optional explicit node count
//! # anything else   comment
//! 0 1
//! 1 4
//! ```
//!
//! Without a `# nodes:` header the node count is one more than the largest
//! id seen. Files with sparse or non-contiguous ids can be loaded with
//! [`load_edge_list_remapped`], which compacts ids to `0..n` in ascending
//! order of the original id and records the mapping in an [`IdMap`].

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Graph, GraphError};

/// Result of reading an edge list.
#[derive(Debug, Clone)]
pub struct EdgeListLoad {
    pub graph: Graph,
    /// Edge lines that were self-loops or duplicates.
    pub dropped_lines: usize,
}

/// Dense id `i` corresponds to `original[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    pub original: Vec<u64>,
}

struct RawEdges {
    pairs: Vec<(u64, u64)>,
    declared_nodes: Option<usize>,
}

fn io_err(path: &Path, source: std::io::Error) -> GraphError {
    GraphError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_header(comment: &str) -> Option<&str> {
    let body = comment.trim_start_matches('#').trim();
    let (key, value) = body.split_once(':')?;
    key.trim().eq_ignore_ascii_case("nodes").then(|| value.trim())
}

fn read_raw(path: &Path) -> Result<RawEdges, GraphError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut pairs = Vec::new();
    let mut declared_nodes = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some(value) = parse_header(trimmed) {
                let n = value.parse::<usize>().map_err(|_| GraphError::Parse {
                    line: line_no,
                    message: format!("invalid node count {value:?}"),
                })?;
                declared_nodes = Some(n);
            }
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next_id = |what: &str| -> Result<u64, GraphError> {
            let token = tokens.next().ok_or_else(|| GraphError::Parse {
                line: line_no,
                message: format!("missing {what} node id"),
            })?;
            token.parse::<u64>().map_err(|_| GraphError::Parse {
                line: line_no,
                message: format!("{token:?} is not a non-negative integer"),
            })
        };
        let u = next_id("first")?;
        let v = next_id("second")?;
        if let Some(extra) = tokens.next() {
            return Err(GraphError::Parse {
                line: line_no,
                message: format!("unexpected token {extra:?}"),
            });
        }
        pairs.push((u, v));
    }
    if pairs.is_empty() && declared_nodes.is_none() {
        return Err(GraphError::EmptyEdgeList);
    }
    Ok(RawEdges {
        pairs,
        declared_nodes,
    })
}

/// Loads an edge list whose ids are already dense.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<EdgeListLoad, GraphError> {
    let raw = read_raw(path.as_ref())?;
    let max_id = raw.pairs.iter().map(|&(u, v)| u.max(v)).max();
    let implied = max_id.map_or(0, |m| m as usize + 1);
    let n_nodes = match raw.declared_nodes {
        Some(n) if n < implied => {
            return Err(GraphError::NodeOutOfRange {
                node: implied - 1,
                n_nodes: n,
            })
        }
        Some(n) => n,
        None => implied,
    };
    let pairs = raw.pairs.iter().map(|&(u, v)| (u as usize, v as usize));
    let (graph, dropped_lines) = Graph::from_edges(n_nodes, pairs)?;
    Ok(EdgeListLoad {
        graph,
        dropped_lines,
    })
}

/// Loads an edge list with arbitrary ids, compacting them to `0..n`.
pub fn load_edge_list_remapped(path: impl AsRef<Path>) -> Result<(EdgeListLoad, IdMap), GraphError> {
    let raw = read_raw(path.as_ref())?;
    let mut original: Vec<u64> = raw.pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    original.sort_unstable();
    original.dedup();
    let dense = |id: u64| original.binary_search(&id).expect("id collected above");
    let pairs: Vec<(usize, usize)> = raw.pairs.iter().map(|&(u, v)| (dense(u), dense(v))).collect();
    let (graph, dropped_lines) = Graph::from_edges(original.len(), pairs)?;
    Ok((
        EdgeListLoad {
            graph,
            dropped_lines,
        },
        IdMap { original },
    ))
}

/// Writes `# nodes: n` followed by one `u v` line per edge.
pub fn save_edge_list(graph: &Graph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(16 * graph.n_edges() + 32);
    writeln!(out, "# nodes: {}", graph.n_nodes()).expect("write to vec");
    for &(u, v) in graph.edges() {
        writeln!(out, "{u} {v}").expect("write to vec");
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

impl IdMap {
    /// Sidecar format: one `original_id dense_id` line per node.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        let path = path.as_ref();
        let mut out = Vec::new();
        for (dense, original) in self.original.iter().enumerate() {
            writeln!(out, "{original} {dense}").expect("write to vec");
        }
        fs::write(path, out).map_err(|e| io_err(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let parse_err = || GraphError::Parse {
                line: idx + 1,
                message: format!("expected \"original_id dense_id\", got {trimmed:?}"),
            };
            let mut tokens = trimmed.split_whitespace();
            let original: u64 = tokens.next().and_then(|t| t.parse().ok()).ok_or_else(parse_err)?;
            let dense: usize = tokens.next().and_then(|t| t.parse().ok()).ok_or_else(parse_err)?;
            rows.push((dense, original));
        }
        rows.sort_unstable();
        if rows.iter().enumerate().any(|(i, &(dense, _))| i != dense) {
            return Err(GraphError::InvalidParameter(
                "id map dense ids must be exactly 0..n".into(),
            ));
        }
        Ok(Self {
            original: rows.into_iter().map(|(_, o)| o).collect(),
        })
    }

    pub fn dense_id(&self, original: u64) -> Option<usize> {
        self.original.binary_search(&original).ok()
    }
}
