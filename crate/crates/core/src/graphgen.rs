//! Watts-Strogatz small-world graphs and the plain-text graph file format.
//!
//! File format (1-indexed, `\n` line endings):
//!
//! ```text
//! # optional comment lines
//! m 4
//! 1 1
//! 1 2
//! 2 3
//! ```
//!
//! Line `m <node_count>` comes first, then one `<j> <k>` line per edge with
//! `j <= k`; a self-loop is written `j j`. Writers emit edges in ascending order.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::patrol::Graph;

pub const MAX_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WSParams {
    pub n: usize,
    /// Lattice degree before rewiring; even.
    pub ring_neighbors: usize,
    pub beta: f64,
    pub with_self_loops: bool,
    pub seed: u64,
}

impl WSParams {
    /// Degree three counting the self-loop: a ring with one neighbour on each
    /// side plus a loop at every node, rewiring probability 0.05.
    pub fn degree_three(n: usize, seed: u64) -> Self {
        Self {
            n,
            ring_neighbors: 2,
            beta: 0.05,
            with_self_loops: true,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ring_neighbors == 0 || !self.ring_neighbors.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "ring_neighbors must be a positive even integer, got {}",
                self.ring_neighbors
            )));
        }
        if self.ring_neighbors >= self.n {
            return Err(Error::InvalidArgument(format!(
                "ring_neighbors ({}) must be smaller than n ({})",
                self.ring_neighbors, self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidArgument(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Ring lattice with each lattice edge `(j, j+l)` rewired with probability
/// `beta` to `(j, u)`, `u` uniform among nodes not adjacent to `j` (the far
/// endpoint is the one detached). Disconnected draws are regenerated on the
/// next random stream, up to [`MAX_ATTEMPTS`] times.
pub fn watts_strogatz(params: &WSParams) -> Result<Graph> {
    params.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(attempt);
        let g = draw(params, &mut rng)?;
        if g.is_connected() {
            return Ok(g);
        }
        log::debug!("watts-strogatz attempt {attempt} disconnected; retrying");
    }
    Err(Error::InvalidGraph(format!(
        "no connected graph after {MAX_ATTEMPTS} attempts"
    )))
}

fn draw(params: &WSParams, rng: &mut ChaCha8Rng) -> Result<Graph> {
    let n = params.n;
    let half = params.ring_neighbors / 2;
    let mut g = Graph::new(n)?;
    for l in 1..=half {
        for j in 0..n {
            g.add_edge(j, (j + l) % n)?;
        }
    }
    for l in 1..=half {
        for j in 0..n {
            let far = (j + l) % n;
            if !g.contains_edge(j, far) || !(rng.random::<f64>() < params.beta) {
                continue;
            }
            let candidates: Vec<usize> = (0..n).filter(|&u| u != j && !g.contains_edge(j, u)).collect();
            if candidates.is_empty() {
                continue;
            }
            let u = candidates[rng.random_range(0..candidates.len())];
            g.remove_edge(j, far);
            g.add_edge(j, u)?;
        }
    }
    if params.with_self_loops {
        for j in 0..n {
            g.add_edge(j, j)?;
        }
    }
    Ok(g)
}

/// Canonical file text for `graph`.
pub fn graph_to_string(graph: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "m {}", graph.node_count());
    for (j, k) in graph.edges() {
        let _ = writeln!(out, "{} {}", j + 1, k + 1);
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut graph: Option<Graph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match graph.as_mut() {
            None => {
                let [tag, count] = fields[..] else {
                    return Err(err(format!("expected header `m <node_count>`, found {line:?}")));
                };
                if tag != "m" {
                    return Err(err(format!("expected header `m <node_count>`, found {line:?}")));
                }
                let m: usize = count
                    .parse()
                    .map_err(|_| err(format!("invalid node count {count:?}")))?;
                graph = Some(Graph::new(m).map_err(|e| err(e.to_string()))?);
            }
            Some(g) => {
                let [a, b] = fields[..] else {
                    return Err(err(format!("expected `<j> <k>`, found {line:?}")));
                };
                let parse = |s: &str| -> Result<usize> {
                    let v: usize = s.parse().map_err(|_| err(format!("invalid node index {s:?}")))?;
                    if v == 0 || v > g.node_count() {
                        return Err(err(format!(
                            "node index {v} outside 1..={}",
                            g.node_count()
                        )));
                    }
                    Ok(v - 1)
                };
                let (j, k) = (parse(a)?, parse(b)?);
                if g.contains_edge(j, k) {
                    return Err(err(format!("duplicate edge {a} {b}")));
                }
                g.add_edge(j, k).map_err(|e| err(e.to_string()))?;
            }
        }
    }
    graph.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        message: "missing header `m <node_count>`".into(),
    })
}

pub fn save_graph(graph: &Graph, path: &Path) -> Result<()> {
    std::fs::write(path, graph_to_string(graph))?;
    Ok(())
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

/// SHA-256 of the canonical file text, hex encoded.
pub fn graph_hash(graph: &Graph) -> String {
    hex::encode(Sha256::digest(graph_to_string(graph).as_bytes()))
}
