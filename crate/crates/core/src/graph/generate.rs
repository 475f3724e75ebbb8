use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{Graph, GraphError};
use crate::rng::{substream, DOMAIN_GRAPH};

/// Random graph families available to the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphModel {
    /// G(n, p): each of the n(n-1)/2 pairs is an edge independently with probability p.
    ErdosRenyi { n: usize, p: f64 },
    /// Preferential attachment.
    ///
    /// Starts from a clique on nodes `0..m`. Each later node `t = m..n`
    /// attaches to `m` distinct earlier nodes, drawn with probability
    /// proportional to current degree (uniformly while no edge exists yet).
    /// The result has exactly `m(m-1)/2 + m(n-m)` edges.
    BarabasiAlbert { n: usize, m: usize },
    Complete { n: usize },
}

impl GraphModel {
    pub fn n_nodes(&self) -> usize {
        match *self {
            Self::ErdosRenyi { n, .. } | Self::BarabasiAlbert { n, .. } | Self::Complete { n } => n,
        }
    }

    fn validate(&self) -> Result<(), GraphError> {
        let bad = |msg: String| Err(GraphError::InvalidParameter(msg));
        if self.n_nodes() < 2 {
            return bad(format!("need n >= 2, got {}", self.n_nodes()));
        }
        match *self {
            Self::ErdosRenyi { p, .. } if !(p > 0.0 && p <= 1.0) => bad(format!("need 0 < p <= 1, got {p}")),
            Self::BarabasiAlbert { n, m } if m < 1 || m >= n => bad(format!("need 1 <= m < n, got m={m}, n={n}")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::ErdosRenyi { n, p } => write!(f, "er:{n}:{p}"),
            Self::BarabasiAlbert { n, m } => write!(f, "ba:{n}:{m}"),
            Self::Complete { n } => write!(f, "complete:{n}"),
        }
    }
}

impl FromStr for GraphModel {
    type Err = GraphError;

    /// Parses `complete:N`, `er:N:P` or `ba:N:M`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::InvalidParameter(format!("unrecognized graph model {s:?}; expected complete:N, er:N:P or ba:N:M"));
        let parts: Vec<&str> = s.split(':').collect();
        let int = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let model = match parts.as_slice() {
            ["complete", n] => Self::Complete { n: int(n)? },
            ["er", n, p] => Self::ErdosRenyi {
                n: int(n)?,
                p: p.parse().map_err(|_| bad())?,
            },
            ["ba", n, m] => Self::BarabasiAlbert { n: int(n)?, m: int(m)? },
            _ => return Err(bad()),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Generates a graph; the output is a pure function of `(model, seed)`.
pub fn generate_graph(model: GraphModel, seed: u64) -> Result<Graph, GraphError> {
    model.validate()?;
    let mut rng = substream(seed, &[DOMAIN_GRAPH]);
    match model {
        GraphModel::Complete { n } => Graph::complete(n),
        GraphModel::ErdosRenyi { n, p } => {
            let mut pairs = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(p) {
                        pairs.push((u, v));
                    }
                }
            }
            Graph::from_edges(n, pairs).map(|(g, _)| g)
        }
        GraphModel::BarabasiAlbert { n, m } => {
            let mut pairs: Vec<(usize, usize)> = (0..m).flat_map(|u| (u + 1..m).map(move |v| (u, v))).collect();
            // Every edge endpoint, so a uniform draw is degree-proportional.
            let mut endpoints: Vec<usize> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
            let mut targets = Vec::with_capacity(m);
            for t in m..n {
                targets.clear();
                while targets.len() < m {
                    let candidate = if endpoints.is_empty() {
                        rng.gen_range(0..t)
                    } else {
                        endpoints[rng.gen_range(0..endpoints.len())]
                    };
                    if !targets.contains(&candidate) {
                        targets.push(candidate);
                    }
                }
                for &target in &targets {
                    pairs.push((target, t));
                    endpoints.push(target);
                    endpoints.push(t);
                }
            }
            Graph::from_edges(n, pairs).map(|(g, _)| g)
        }
    }
}
