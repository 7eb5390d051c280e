use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite undirected graph on nodes `0..m`; edges are stored as `(j, k)` with
/// `j <= k`, self-loops allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    node_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(node_count: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        Ok(Self {
            node_count,
            edges: BTreeSet::new(),
        })
    }

    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::new(node_count)?;
        for (j, k) in edges {
            g.add_edge(j, k)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, j: usize, k: usize) -> Result<()> {
        let m = self.node_count;
        if j >= m || k >= m {
            return Err(Error::InvalidGraph(format!(
                "edge ({j}, {k}) references a node outside 0..{m}"
            )));
        }
        if !self.edges.insert(ordered(j, k)) {
            return Err(Error::InvalidGraph(format!("duplicate edge ({j}, {k})")));
        }
        Ok(())
    }

    pub(crate) fn remove_edge(&mut self, j: usize, k: usize) -> bool {
        self.edges.remove(&ordered(j, k))
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in ascending `(j, k)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains_edge(&self, j: usize, k: usize) -> bool {
        self.edges.contains(&ordered(j, k))
    }

    pub fn has_self_loop(&self, j: usize) -> bool {
        self.contains_edge(j, j)
    }

    /// Incident edges, a self-loop counting once.
    pub fn degree(&self, j: usize) -> usize {
        self.edges.iter().filter(|(a, b)| *a == j || *b == j).count()
    }

    /// Neighbours other than `j` itself.
    pub fn neighbors(&self, j: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| match (a == j, b == j) {
                (true, false) => Some(b),
                (false, true) => Some(a),
                _ => None,
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency_lists();
        reachable_count(&adj, 0) == self.node_count
    }

    pub(crate) fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(a, b) in &self.edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        adj
    }
}

fn ordered(j: usize, k: usize) -> (usize, usize) {
    if j <= k {
        (j, k)
    } else {
        (k, j)
    }
}

pub(crate) fn reachable_count(adj: &[Vec<usize>], start: usize) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count
}
