use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{EstimatorError, ProbVector, SourceEstimator, EPS_FLOOR};
use crate::diffusion::{LabeledSample, SnapshotMatrix, Status};
use crate::graph::Graph;

/// Weights of the two evidence terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicWeights {
    /// Weight of earliness: 1 when infected in the first snapshot, `decay^j`
    /// when first seen in column `j`.
    pub earliness: f64,
    /// Weight of the susceptible share of a node's neighborhood in the first
    /// snapshot, counted only for nodes infected in that snapshot.
    pub neighbor_deficit: f64,
    pub decay: f64,
}

impl Default for HeuristicWeights {
    fn default() -> Self {
        Self {
            earliness: 0.7,
            neighbor_deficit: 0.3,
            decay: 0.5,
        }
    }
}

/// Scores nodes by how early they appear infected and how untouched their
/// neighborhood still is at the first observation.
pub fn estimate_heuristic(x: &SnapshotMatrix, g: &Graph, weights: &HeuristicWeights) -> Result<ProbVector, EstimatorError> {
    if x.n_nodes() != g.n_nodes() {
        return Err(EstimatorError::SizeMismatch {
            expected: g.n_nodes(),
            got: x.n_nodes(),
        });
    }
    let first = x.column(0);
    let probs = (0..g.n_nodes())
        .map(|v| {
            let Some(j) = x.first_seen(v) else {
                return EPS_FLOOR;
            };
            let earliness = weights.decay.powi(j as i32);
            let deficit = if j == 0 {
                let neighbors = g.neighbors(v);
                if neighbors.is_empty() {
                    1.0
                } else {
                    neighbors.iter().filter(|&&u| first[u] == Status::S).count() as f64 / neighbors.len() as f64
                }
            } else {
                0.0
            };
            (weights.earliness * earliness + weights.neighbor_deficit * deficit).clamp(EPS_FLOOR, 1.0)
        })
        .collect();
    ProbVector::new(probs)
}

pub struct HeuristicEstimator {
    graph: Arc<Graph>,
    weights: HeuristicWeights,
}

impl HeuristicEstimator {
    pub fn new(graph: Arc<Graph>) -> Self {
        Self {
            graph,
            weights: HeuristicWeights::default(),
        }
    }

    pub fn with_weights(graph: Arc<Graph>, weights: HeuristicWeights) -> Self {
        Self { graph, weights }
    }
}

impl SourceEstimator for HeuristicEstimator {
    fn estimate(&self, sample: &LabeledSample) -> Result<ProbVector, EstimatorError> {
        estimate_heuristic(&sample.snapshots, &self.graph, &self.weights)
    }

    fn name(&self) -> String {
        "heuristic".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphModel};
    use Status::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|v| (v, v + 1))).unwrap().0
    }

    #[test]
    fn no_evidence_gives_floor_everywhere() {
        let g = path(5);
        let x = SnapshotMatrix::new(vec![1, 2], vec![vec![S; 5], vec![S; 5]]).unwrap();
        let pi = estimate_heuristic(&x, &g, &HeuristicWeights::default()).unwrap();
        assert!(pi.as_slice().iter().all(|&p| p == EPS_FLOOR));
    }

    #[test]
    fn lone_infected_node_is_unique_maximum() {
        let g = generate_graph(GraphModel::BarabasiAlbert { n: 30, m: 2 }, 4).unwrap();
        let mut col = vec![S; 30];
        col[17] = I;
        let x = SnapshotMatrix::new(vec![1], vec![col]).unwrap();
        let pi = estimate_heuristic(&x, &g, &HeuristicWeights::default()).unwrap();
        let max = pi.get(17);
        assert!((0..30).filter(|&v| v != 17).all(|v| pi.get(v) < max));
        assert_eq!(max, 1.0);
    }

    #[test]
    fn earlier_sighting_scores_higher() {
        let g = path(4);
        let x = SnapshotMatrix::new(vec![1, 2, 3], vec![vec![S, I, S, S], vec![I, I, I, S], vec![I, R, I, I]]).unwrap();
        let pi = estimate_heuristic(&x, &g, &HeuristicWeights::default()).unwrap();
        assert!(pi.get(1) > pi.get(0));
        assert!(pi.get(0) > pi.get(3));
        assert_eq!(pi.get(0), pi.get(2));
    }

    #[test]
    fn size_mismatch_is_reported() {
        let x = SnapshotMatrix::new(vec![1], vec![vec![I, S]]).unwrap();
        assert!(matches!(
            estimate_heuristic(&x, &path(3), &HeuristicWeights::default()),
            Err(EstimatorError::SizeMismatch { .. })
        ));
    }
}
