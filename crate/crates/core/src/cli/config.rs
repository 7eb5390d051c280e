//! Experiment configuration: a flat UTF-8 text file of `key = value` lines.
//!
//! ```text
//! # comment
//! graph = graphs/sf.txt        # or the ws_* keys below
//! ws_n = 18
//! ws_ring_neighbors = 2
//! ws_beta = 0.05
//! ws_self_loops = true
//! ws_seed = 10
//! pi = uniform                 # or a comma-separated vector
//! q0 = uniform
//! c_list = 1, 5, 9
//! include_soc = true
//! worst_k = 5, 9
//! tolerance = 1e-8
//! max_iters = 50000
//! armijo_c = 1e-4
//! armijo_rho = 0.5
//! lambda_floor = 1e-12
//! strategy = joint
//! output_dir = results
//! seed = 0
//! restarts = 1
//! ```
//!
//! Unknown and repeated keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::convexsolve::{SolverOptions, Strategy};
use crate::error::{Error, Result};
use crate::graphgen::{load_graph, watts_strogatz, WSParams};
use crate::patrol::Graph;
use crate::probspace::ProbabilityVector;

const KEYS: &[&str] = &[
    "graph",
    "ws_n",
    "ws_ring_neighbors",
    "ws_beta",
    "ws_self_loops",
    "ws_seed",
    "pi",
    "q0",
    "c_list",
    "include_soc",
    "worst_k",
    "tolerance",
    "max_iters",
    "armijo_c",
    "armijo_rho",
    "lambda_floor",
    "strategy",
    "output_dir",
    "seed",
    "restarts",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    File(PathBuf),
    WattsStrogatz(WSParams),
}

impl GraphSource {
    pub fn load(&self) -> Result<Graph> {
        match self {
            GraphSource::File(path) => load_graph(path),
            GraphSource::WattsStrogatz(params) => watts_strogatz(params),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionSpec {
    Uniform,
    Explicit(Vec<f64>),
}

impl DistributionSpec {
    pub fn resolve(&self, m: usize) -> Result<ProbabilityVector> {
        match self {
            DistributionSpec::Uniform => ProbabilityVector::uniform(m),
            DistributionSpec::Explicit(v) => {
                if v.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        actual: v.len(),
                    });
                }
                ProbabilityVector::new(v.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub pi: DistributionSpec,
    pub q0: DistributionSpec,
    /// Worst-subset sizes; each run uses the radius `d = m / c - 1`.
    pub c_list: Vec<usize>,
    pub include_soc: bool,
    /// Sizes of the "Worst k" summary rows.
    pub worst_k: Vec<usize>,
    pub solver: SolverOptions,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    /// Starts per run: the Metropolis start, then random feasible starts.
    pub restarts: usize,
}

fn config_error(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        reason: reason.into(),
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| config_error(key, format!("cannot parse {raw:?}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn parse_bool(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_error(key, format!("expected true or false, found {raw:?}"))),
    }
}

fn parse_distribution(key: &str, raw: &str) -> Result<DistributionSpec> {
    if raw == "uniform" {
        return Ok(DistributionSpec::Uniform);
    }
    let v: Vec<f64> = parse_list(key, raw)?;
    if v.is_empty() {
        return Err(config_error(key, "expected `uniform` or a comma-separated vector"));
    }
    Ok(DistributionSpec::Explicit(v))
}

impl ExperimentConfig {
    /// Parses config text; a relative `graph` path is resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut entries: BTreeMap<&str, &str> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected `key = value`, found {line:?}"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(config_error(key, format!("unknown key (line {})", idx + 1)));
            }
            if entries.insert(key, value).is_some() {
                return Err(config_error(key, format!("repeated key (line {})", idx + 1)));
            }
        }
        let get = |key: &str| entries.get(key).copied();

        let seed: u64 = get("seed").map(|v| parse_value("seed", v)).transpose()?.unwrap_or(0);
        let has_ws = entries.keys().any(|k| k.starts_with("ws_"));
        let graph = match (get("graph"), has_ws) {
            (Some(_), true) => {
                return Err(config_error("graph", "give either a graph file or ws_* parameters, not both"))
            }
            (Some(path), false) => {
                let path = PathBuf::from(path);
                GraphSource::File(if path.is_relative() { base_dir.join(path) } else { path })
            }
            (None, true) => {
                let n = get("ws_n").ok_or_else(|| config_error("ws_n", "required with ws_* parameters"))?;
                let defaults = WSParams::degree_three(parse_value("ws_n", n)?, seed);
                let params = WSParams {
                    n: defaults.n,
                    ring_neighbors: get("ws_ring_neighbors")
                        .map(|v| parse_value("ws_ring_neighbors", v))
                        .transpose()?
                        .unwrap_or(defaults.ring_neighbors),
                    beta: get("ws_beta")
                        .map(|v| parse_value("ws_beta", v))
                        .transpose()?
                        .unwrap_or(defaults.beta),
                    with_self_loops: get("ws_self_loops")
                        .map(|v| parse_bool("ws_self_loops", v))
                        .transpose()?
                        .unwrap_or(defaults.with_self_loops),
                    seed: get("ws_seed")
                        .map(|v| parse_value("ws_seed", v))
                        .transpose()?
                        .unwrap_or(seed),
                };
                params.validate().map_err(|e| config_error("ws_n", e.to_string()))?;
                GraphSource::WattsStrogatz(params)
            }
            (None, false) => return Err(config_error("graph", "a graph file or ws_* parameters is required")),
        };

        let defaults = SolverOptions::default();
        let solver = SolverOptions {
            tolerance: get("tolerance").map(|v| parse_value("tolerance", v)).transpose()?.unwrap_or(defaults.tolerance),
            max_iters: get("max_iters").map(|v| parse_value("max_iters", v)).transpose()?.unwrap_or(defaults.max_iters),
            armijo_c: get("armijo_c").map(|v| parse_value("armijo_c", v)).transpose()?.unwrap_or(defaults.armijo_c),
            armijo_rho: get("armijo_rho").map(|v| parse_value("armijo_rho", v)).transpose()?.unwrap_or(defaults.armijo_rho),
            lambda_floor: get("lambda_floor")
                .map(|v| parse_value("lambda_floor", v))
                .transpose()?
                .unwrap_or(defaults.lambda_floor),
            strategy: match get("strategy") {
                None | Some("joint") => Strategy::Joint,
                Some("alternating") => Strategy::Alternating,
                Some(other) => {
                    return Err(config_error("strategy", format!("expected joint or alternating, found {other:?}")))
                }
            },
        };
        solver.validate()?;

        let c_list: Vec<usize> = get("c_list").map(|v| parse_list("c_list", v)).transpose()?.unwrap_or_default();
        let worst_k = match get("worst_k") {
            Some(v) => parse_list("worst_k", v)?,
            None => c_list.iter().copied().filter(|&c| c > 1).collect(),
        };
        let restarts = get("restarts").map(|v| parse_value("restarts", v)).transpose()?.unwrap_or(1);
        if restarts == 0 {
            return Err(config_error("restarts", "must be at least 1"));
        }
        Ok(Self {
            graph,
            pi: get("pi").map(|v| parse_distribution("pi", v)).transpose()?.unwrap_or(DistributionSpec::Uniform),
            q0: get("q0").map(|v| parse_distribution("q0", v)).transpose()?.unwrap_or(DistributionSpec::Uniform),
            c_list,
            include_soc: get("include_soc").map(|v| parse_bool("include_soc", v)).transpose()?.unwrap_or(true),
            worst_k,
            solver,
            output_dir: get("output_dir").map(PathBuf::from),
            seed,
            restarts,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Checks the parts that depend on the graph size `m`.
    pub fn validate_for(&self, m: usize) -> Result<()> {
        for &c in &self.c_list {
            if c == 0 || c >= m {
                return Err(config_error(
                    "c_list",
                    format!("c = {c} must satisfy 1 <= c < m = {m} so that d = m/c - 1 > 0"),
                ));
            }
        }
        for &k in &self.worst_k {
            if k == 0 || k > m {
                return Err(config_error("worst_k", format!("k = {k} outside 1..={m}")));
            }
        }
        let q0 = self.q0.resolve(m).map_err(|e| config_error("q0", e.to_string()))?;
        if !q0.is_strictly_positive() {
            return Err(config_error("q0", "must be strictly positive"));
        }
        let pi = self.pi.resolve(m).map_err(|e| config_error("pi", e.to_string()))?;
        if !pi.is_strictly_positive() {
            return Err(config_error("pi", "must be strictly positive"));
        }
        if self.c_list.is_empty() && !self.include_soc {
            return Err(config_error("c_list", "nothing to run: empty c_list and include_soc = false"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(text, Path::new("/base"))
    }

    #[test]
    fn full_config() {
        let cfg = parse(
            "# table\nws_n = 18\nws_seed = 10\nc_list = 1, 5, 9\ninclude_soc = true\nmax_iters = 300 # short\nseed = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.graph, GraphSource::WattsStrogatz(WSParams::degree_three(18, 10)));
        assert_eq!(cfg.c_list, vec![1, 5, 9]);
        assert_eq!(cfg.worst_k, vec![5, 9]);
        assert_eq!(cfg.solver.max_iters, 300);
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.restarts, 1);
        cfg.validate_for(18).unwrap();
    }

    #[test]
    fn relative_graph_paths_resolve_against_base() {
        let cfg = parse("graph = g.txt\n").unwrap();
        assert_eq!(cfg.graph, GraphSource::File(PathBuf::from("/base/g.txt")));
        assert!(cfg.c_list.is_empty() && cfg.include_soc);
    }

    #[test]
    fn errors_name_the_key() {
        let key_of = |text: &str| match parse(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("{other:?}"),
        };
        assert_eq!(key_of("ws_n = 8\ncolour = red\n"), "colour");
        assert_eq!(key_of("ws_n = 8\nseed = 1\nseed = 2\n"), "seed");
        assert_eq!(key_of("ws_n = 8\nmax_iters = many\n"), "max_iters");
        assert_eq!(key_of("ws_n = 8\narmijo_rho = 1.5\n"), "armijo_rho");
        assert_eq!(key_of("graph = a.txt\nws_n = 8\n"), "graph");
        assert_eq!(key_of("seed = 1\n"), "graph");
        assert!(matches!(parse("ws_n 8\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn size_dependent_checks() {
        let cfg = parse("ws_n = 6\nc_list = 6\n").unwrap();
        assert!(matches!(cfg.validate_for(6), Err(Error::Config { key, .. }) if key == "c_list"));
        let cfg = parse("ws_n = 6\nq0 = 0.5, 0.5, 0, 0, 0, 0\n").unwrap();
        assert!(matches!(cfg.validate_for(6), Err(Error::Config { key, .. }) if key == "q0"));
        let cfg = parse("ws_n = 6\ninclude_soc = false\n").unwrap();
        assert!(cfg.validate_for(6).is_err());
        let cfg = parse("ws_n = 6\nc_list =\ninclude_soc = true\n").unwrap();
        cfg.validate_for(6).unwrap();
    }
}
