use nalgebra::DMatrix;

use super::graph::{reachable_count, Graph};
use crate::error::{Error, Result};
use crate::probspace::ProbabilityVector;

/// Row sums of `w` must match `pi` to this absolute tolerance.
pub const ROW_SUM_TOLERANCE: f64 = 1e-10;
const SYMMETRY_TOLERANCE: f64 = 1e-14;

/// Reversible chain with stationary distribution `pi`, parameterized by the
/// symmetric edge weights `w(j,k) = pi(j) P(j,k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReversibleChainParam {
    graph: Graph,
    weights: DMatrix<f64>,
    pi: ProbabilityVector,
}

/// Validates `w` against the graph support, symmetry and `w 1 = pi`.
pub fn chain_from_weights(
    graph: &Graph,
    weights: DMatrix<f64>,
    pi: ProbabilityVector,
) -> Result<ReversibleChainParam> {
    let m = graph.node_count();
    if weights.nrows() != m || weights.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: weights.nrows().max(weights.ncols()),
        });
    }
    if pi.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: pi.len(),
        });
    }
    if !pi.is_strictly_positive() {
        return Err(Error::InvalidChain(
            "stationary distribution must be strictly positive".into(),
        ));
    }
    for j in 0..m {
        for k in 0..m {
            let v = weights[(j, k)];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidChain(format!(
                    "weight ({j}, {k}) = {v} is not a nonnegative finite number"
                )));
            }
            if (v - weights[(k, j)]).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::InvalidChain(format!(
                    "weights are not symmetric at ({j}, {k})"
                )));
            }
            if v != 0.0 && !graph.contains_edge(j, k) {
                return Err(Error::InvalidChain(format!(
                    "weight ({j}, {k}) = {v} lies outside the graph's edge set"
                )));
            }
        }
    }
    for j in 0..m {
        let sum: f64 = weights.row(j).sum();
        if (sum - pi[j]).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::InvalidChain(format!(
                "row {j} sums to {sum}, expected pi = {}",
                pi[j]
            )));
        }
    }
    Ok(ReversibleChainParam {
        graph: graph.clone(),
        weights,
        pi,
    })
}

impl ReversibleChainParam {
    /// Builds the chain from one weight per edge, in the graph's edge order.
    pub fn from_edge_weights(graph: &Graph, edge_weights: &[f64], pi: ProbabilityVector) -> Result<Self> {
        if edge_weights.len() != graph.edge_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.edge_count(),
                actual: edge_weights.len(),
            });
        }
        chain_from_weights(graph, edge_weights_to_matrix(graph, edge_weights), pi)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn pi(&self) -> &ProbabilityVector {
        &self.pi
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// `P(j, k) = w(j, k) / pi(j)`.
    pub fn transition_matrix(&self) -> DMatrix<f64> {
        let mut p = self.weights.clone();
        for j in 0..p.nrows() {
            let pj = self.pi[j];
            p.row_mut(j).iter_mut().for_each(|v| *v /= pj);
        }
        p
    }

    /// One weight per edge, graph edge order.
    pub fn edge_weights(&self) -> Vec<f64> {
        self.graph.edges().map(|(j, k)| self.weights[(j, k)]).collect()
    }

    /// `max_k |(pi^T P)_k - pi_k|`.
    pub fn stationarity_residual(&self) -> f64 {
        let p = self.transition_matrix();
        let pi = nalgebra::DVector::from_column_slice(self.pi.as_slice());
        (p.transpose() * &pi - &pi).amax()
    }

    /// Strongly connected on the support of `P` (symmetric, so plain BFS).
    pub fn is_irreducible(&self) -> bool {
        let adj = support_adjacency(&self.weights);
        reachable_count(&adj, 0) == self.node_count()
    }
}

pub(crate) fn edge_weights_to_matrix(graph: &Graph, edge_weights: &[f64]) -> DMatrix<f64> {
    let m = graph.node_count();
    let mut w = DMatrix::zeros(m, m);
    for ((j, k), &v) in graph.edges().zip(edge_weights) {
        w[(j, k)] = v;
        w[(k, j)] = v;
    }
    w
}

pub(crate) fn support_adjacency(weights: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let m = weights.nrows();
    (0..m)
        .map(|j| (0..m).filter(|&k| k != j && weights[(j, k)] > 0.0).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_node_swap() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let c = chain_from_weights(&g, w, ProbabilityVector::uniform(2).unwrap()).unwrap();
        assert_eq!(c.transition_matrix(), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert!(c.is_irreducible());
        assert!(c.stationarity_residual() <= 1e-15);
    }

    #[test]
    fn asymmetric_weights_rejected() {
        let g = Graph::from_edges(2, [(0, 0), (0, 1), (1, 1)]).unwrap();
        let w = DMatrix::from_row_slice(2, 2, &[0.2, 0.3, 0.2, 0.3]);
        let r = chain_from_weights(&g, w, ProbabilityVector::uniform(2).unwrap());
        assert!(matches!(r, Err(Error::InvalidChain(msg)) if msg.contains("symmetric")));
    }

    #[test]
    fn support_violation_rejected() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let w = DMatrix::from_row_slice(2, 2, &[0.25, 0.25, 0.25, 0.25]);
        let r = chain_from_weights(&g, w, ProbabilityVector::uniform(2).unwrap());
        assert!(matches!(r, Err(Error::InvalidChain(msg)) if msg.contains("edge set")));
    }

    #[test]
    fn row_sum_mismatch_rejected() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 0.4, 0.4, 0.0]);
        let r = chain_from_weights(&g, w, ProbabilityVector::uniform(2).unwrap());
        assert!(matches!(r, Err(Error::InvalidChain(msg)) if msg.contains("sums")));
    }

    #[test]
    fn triangle_with_loops_is_uniform() {
        let g = Graph::from_edges(3, [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]).unwrap();
        let w = DMatrix::from_element(3, 3, 1.0 / 9.0);
        let c = chain_from_weights(&g, w, ProbabilityVector::uniform(3).unwrap()).unwrap();
        for v in c.transition_matrix().iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(c.edge_weights().len(), 6);
    }

    #[test]
    fn reducible_support_detected() {
        let g = Graph::from_edges(3, [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)]).unwrap();
        let third = 1.0 / 3.0;
        let w = DMatrix::from_row_slice(3, 3, &[third, 0.0, 0.0, 0.0, third, 0.0, 0.0, 0.0, third]);
        let c = chain_from_weights(&g, w, ProbabilityVector::uniform(3).unwrap()).unwrap();
        assert!(!c.is_irreducible());
    }
}
