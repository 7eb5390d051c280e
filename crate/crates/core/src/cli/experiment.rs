//! Batch runs over the configured `c` values and the nominal baseline, and the
//! result bundle they produce.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::convexsolve::{SolverOptions, Status};
use crate::error::{Error, Result};
use crate::graphgen::{graph_hash, graph_to_string, parse_graph};
use crate::patrol::{
    chain_from_weights, hitting_time_vector, solve_patrol_ddroc_from, solve_patrol_soc_from,
    EdgeParameterization, Graph, PatrolSolution, ReversibleChainParam,
};
use crate::probspace::{AmbiguitySet, ProbabilityVector};
use crate::worstcase::{worst_subset_average, CostTable, ExtendedReal};

pub const BUNDLE_FILE: &str = "bundle.json";
pub const GRAPH_FILE: &str = "graph.txt";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Method {
    Soc,
    Ddroc { c: usize, d: f64 },
}

impl Method {
    /// Column heading: `c = 5` or `SOC`.
    pub fn label(&self) -> String {
        match self {
            Method::Soc => "SOC".into(),
            Method::Ddroc { c, .. } => format!("c = {c}"),
        }
    }

    /// File stem for the per-run result file.
    pub fn file_stem(&self) -> String {
        match self {
            Method::Soc => "run_soc".into(),
            Method::Ddroc { c, .. } => format!("run_c{c}"),
        }
    }
}

/// One statistic of a hitting-time vector. `value` is `None` when infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub value: Option<f64>,
}

/// Which rows [`evaluate_policy`] reports.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsSpec {
    pub worst_k: Vec<usize>,
    /// Weights of the "Mean" row.
    pub q0: ProbabilityVector,
}

/// Rows "Worst", "Worst k" for each requested `k`, and "Mean" under `q0`.
pub fn summarize(times: &[ExtendedReal], spec: &StatsSpec) -> Result<Vec<SummaryRow>> {
    let m = times.len();
    if spec.q0.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: spec.q0.len(),
        });
    }
    let labels = std::iter::once("Worst".to_string())
        .chain(spec.worst_k.iter().map(|k| format!("Worst {k}")))
        .chain(std::iter::once("Mean".to_string()));
    if times.iter().any(|t| t.is_infinite()) {
        return Ok(labels.map(|label| SummaryRow { label, value: None }).collect());
    }
    let finite: Vec<f64> = times.iter().map(|t| t.to_f64()).collect();
    let table = CostTable::new(finite.clone())?;
    let mut values = vec![table.max()];
    for &k in &spec.worst_k {
        values.push(worst_subset_average(&table, k)?.0);
    }
    values.push(spec.q0.expectation(&finite)?);
    Ok(labels
        .zip(values)
        .map(|(label, v)| SummaryRow { label, value: Some(v) })
        .collect())
}

/// Computes the hitting-time vector of `chain` once and summarizes it.
pub fn evaluate_policy(chain: &ReversibleChainParam, graph: &Graph, spec: &StatsSpec) -> Result<Vec<SummaryRow>> {
    if chain.graph() != graph {
        return Err(Error::InvalidArgument("chain was built on a different graph".into()));
    }
    summarize(&hitting_time_vector(chain)?, spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSummary {
    pub lambdas: Vec<f64>,
    pub nu: f64,
    pub dual_value: f64,
    pub self_check_passed: bool,
    pub floor_active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub method: Method,
    /// Set when the solve failed; the numeric fields are then empty.
    pub error: Option<String>,
    pub status: Option<Status>,
    /// Worst-case expectation for robust runs, nominal mean for the baseline.
    pub cost: Option<f64>,
    pub iterations: usize,
    pub kkt_residual: Option<f64>,
    pub irreducible: bool,
    /// Index of the start that produced the result.
    pub restart: usize,
    pub stationary: Vec<f64>,
    /// Transition matrix, row-major.
    pub transition: Vec<f64>,
    pub hitting_times: Vec<f64>,
    pub summary: Vec<SummaryRow>,
    pub dual: Option<DualSummary>,
}

impl RunResult {
    fn failed(method: Method, error: &Error) -> Self {
        Self {
            method,
            error: Some(error.to_string()),
            status: None,
            cost: None,
            iterations: 0,
            kkt_residual: None,
            irreducible: false,
            restart: 0,
            stationary: Vec::new(),
            transition: Vec::new(),
            hitting_times: Vec::new(),
            summary: Vec::new(),
            dual: None,
        }
    }

    /// Rebuilds the chain on `graph` from the stored transition matrix.
    pub fn chain(&self, graph: &Graph) -> Result<ReversibleChainParam> {
        let m = graph.node_count();
        if self.transition.len() != m * m || self.stationary.len() != m {
            return Err(Error::InvalidArgument(format!(
                "stored chain does not have {m} nodes"
            )));
        }
        let pi = ProbabilityVector::new(self.stationary.clone())?;
        let p = DMatrix::from_row_slice(m, m, &self.transition);
        let mut w = DMatrix::zeros(m, m);
        for j in 0..m {
            for k in j..m {
                // average the two sides of detailed balance to keep w symmetric
                let v = 0.5 * (pi[j] * p[(j, k)] + pi[k] * p[(k, j)]);
                w[(j, k)] = v;
                w[(k, j)] = v;
            }
        }
        chain_from_weights(graph, w, pi)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub graph_hash: String,
    pub node_count: usize,
    pub edge_count: usize,
    /// Canonical graph file text.
    pub graph: String,
    pub pi: Vec<f64>,
    pub q0: Vec<f64>,
    pub solver: SolverOptions,
    pub seed: u64,
    pub restarts: usize,
    pub worst_k: Vec<usize>,
    pub runs: Vec<RunResult>,
}

impl ResultBundle {
    pub fn graph(&self) -> Result<Graph> {
        parse_graph(&self.graph)
    }

    pub fn any_failed(&self) -> bool {
        self.runs.iter().any(|r| r.error.is_some())
    }

    /// Writes `bundle.json`, `graph.txt` and one JSON file per run into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(BUNDLE_FILE), to_json(self)?)?;
        std::fs::write(dir.join(GRAPH_FILE), &self.graph)?;
        for run in &self.runs {
            std::fs::write(dir.join(format!("{}.json", run.method.file_stem())), to_json(run)?)?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(BUNDLE_FILE))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Io(e.to_string()))
}

/// SplitMix64 finalizer; decorrelates per-run seeds derived by index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct RunContext<'a> {
    graph: &'a Graph,
    pi: &'a ProbabilityVector,
    q0: &'a ProbabilityVector,
    cfg: &'a ExperimentConfig,
    starts: Vec<Option<Vec<f64>>>,
}

impl RunContext<'_> {
    fn solve_once(&self, method: Method, init: Option<&[f64]>) -> Result<PatrolSolution> {
        let opts = &self.cfg.solver;
        match method {
            Method::Soc => solve_patrol_soc_from(self.graph, self.pi, self.q0, opts, init),
            Method::Ddroc { d, .. } => {
                let set = AmbiguitySet::new(self.q0.clone(), d)?;
                solve_patrol_ddroc_from(self.graph, self.pi, &set, opts, init)
            }
        }
    }

    fn run(&self, method: Method) -> RunResult {
        let mut best: Option<(usize, PatrolSolution)> = None;
        let mut last_error = None;
        for (restart, init) in self.starts.iter().enumerate() {
            match self.solve_once(method, init.as_deref()) {
                Ok(sol) => {
                    if best.as_ref().is_none_or(|(_, b)| sol.cost < b.cost) {
                        best = Some((restart, sol));
                    }
                }
                Err(e) => {
                    log::warn!("{} restart {restart} failed: {e}", method.label());
                    last_error = Some(e);
                }
            }
        }
        let Some((restart, sol)) = best else {
            return RunResult::failed(method, &last_error.unwrap_or(Error::Solver("no starts".into())));
        };
        match self.record(method, restart, &sol) {
            Ok(r) => r,
            Err(e) => RunResult::failed(method, &e),
        }
    }

    fn record(&self, method: Method, restart: usize, sol: &PatrolSolution) -> Result<RunResult> {
        let spec = StatsSpec {
            worst_k: self.cfg.worst_k.clone(),
            q0: self.q0.clone(),
        };
        let times: Vec<ExtendedReal> = sol.hitting_times.iter().map(|&h| ExtendedReal::from_f64(h)).collect();
        let summary = summarize(&times, &spec)?;
        let p = sol.chain.transition_matrix();
        let transition = (0..p.nrows()).flat_map(|j| p.row(j).iter().copied().collect::<Vec<_>>()).collect();
        let dual = sol.robust.as_ref().map(|r| DualSummary {
            lambdas: r.dual.lambdas().to_vec(),
            nu: r.dual.nu(),
            dual_value: r.dual_value,
            self_check_passed: r.self_check_passed,
            floor_active: r.floor_active,
        });
        Ok(RunResult {
            method,
            error: None,
            status: Some(sol.status),
            cost: Some(sol.cost),
            iterations: sol.iterations,
            kkt_residual: Some(sol.kkt_residual),
            irreducible: sol.irreducible,
            restart,
            stationary: self.pi.as_slice().to_vec(),
            transition,
            hitting_times: sol.hitting_times.clone(),
            summary,
            dual,
        })
    }
}

/// Random feasible starts for restarts after the first: uniform edge weights,
/// projected onto the feasible polytope.
fn random_starts(graph: &Graph, pi: &ProbabilityVector, restarts: usize, seed: u64) -> Result<Vec<Option<Vec<f64>>>> {
    let param = EdgeParameterization::new(graph, pi)?;
    let poly = param.polytope()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![None];
    for _ in 1..restarts {
        let raw = DVector::from_fn(param.edge_count(), |_, _| rng.random::<f64>() / graph.node_count() as f64);
        starts.push(Some(poly.project(&raw)?.as_slice().to_vec()));
    }
    Ok(starts)
}

/// Runs every configured method. Validation errors abort; solver failures are
/// recorded in the affected run only.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultBundle> {
    let graph = cfg.graph.load()?;
    let m = graph.node_count();
    cfg.validate_for(m)?;
    if !graph.is_connected() {
        return Err(Error::InvalidGraph("graph is not connected".into()));
    }
    let pi = cfg.pi.resolve(m)?;
    let q0 = cfg.q0.resolve(m)?;

    let mut methods = Vec::new();
    for &c in &cfg.c_list {
        let d = AmbiguitySet::radius_for_subset_size(m, c)?;
        log::info!("c = {c}: radius d = {d}");
        methods.push(Method::Ddroc { c, d });
    }
    if cfg.include_soc {
        methods.push(Method::Soc);
    }

    let starts = random_starts(&graph, &pi, cfg.restarts, derive_seed(cfg.seed, 0))?;
    let ctx = RunContext {
        graph: &graph,
        pi: &pi,
        q0: &q0,
        cfg,
        starts,
    };
    let runs: Vec<RunResult> = methods.par_iter().map(|&method| ctx.run(method)).collect();
    Ok(ResultBundle {
        graph_hash: graph_hash(&graph),
        node_count: m,
        edge_count: graph.edge_count(),
        graph: graph_to_string(&graph),
        pi: pi.as_slice().to_vec(),
        q0: q0.as_slice().to_vec(),
        solver: cfg.solver.clone(),
        seed: cfg.seed,
        restarts: cfg.restarts,
        worst_k: cfg.worst_k.clone(),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worstcase::worst_expectation_greedy;

    fn finite(v: &[f64]) -> Vec<ExtendedReal> {
        v.iter().map(|&x| ExtendedReal::Finite(x)).collect()
    }

    fn spec(m: usize, worst_k: Vec<usize>) -> StatsSpec {
        StatsSpec {
            worst_k,
            q0: ProbabilityVector::uniform(m).unwrap(),
        }
    }

    #[test]
    fn summary_rows() {
        let rows = summarize(&finite(&[1.0, 2.0, 3.0, 4.0]), &spec(4, vec![1, 2])).unwrap();
        let labels: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["Worst", "Worst 1", "Worst 2", "Mean"]);
        assert_eq!(rows[0].value, Some(4.0));
        assert_eq!(rows[1].value, rows[0].value);
        assert_eq!(rows[2].value, Some(3.5));
        assert_eq!(rows[3].value, Some(2.5));

        let flat = summarize(&finite(&[7.0; 5]), &spec(5, vec![2, 3])).unwrap();
        assert!(flat.iter().all(|r| (r.value.unwrap() - 7.0).abs() <= 1e-12 * 7.0));

        let mut inf = finite(&[1.0, 2.0, 3.0]);
        inf[1] = ExtendedReal::Infinite;
        assert!(summarize(&inf, &spec(3, vec![2])).unwrap().iter().all(|r| r.value.is_none()));
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(derive_seed(7, 3), derive_seed(7, 4));
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
    }

    fn small_config(extra: &str) -> ExperimentConfig {
        let text = format!("ws_n = 8\nws_seed = 3\nmax_iters = 400\n{extra}");
        ExperimentConfig::parse(&text, Path::new(".")).unwrap()
    }

    #[test]
    fn batch_covers_each_method_and_round_trips() {
        let cfg = small_config("c_list = 1, 4\ninclude_soc = true\nrestarts = 2\n");
        let bundle = run_experiment(&cfg).unwrap();
        let labels: Vec<String> = bundle.runs.iter().map(|r| r.method.label()).collect();
        assert_eq!(labels, ["c = 1", "c = 4", "SOC"]);
        assert!(!bundle.any_failed());
        let graph = bundle.graph().unwrap();
        for run in &bundle.runs {
            assert_eq!(run.hitting_times.len(), 8);
            assert_eq!(run.summary.len(), 3);
            let chain = run.chain(&graph).unwrap();
            let rows = evaluate_policy(&chain, &graph, &spec(8, vec![4])).unwrap();
            for (a, b) in rows.iter().zip(&run.summary) {
                let (a, b) = (a.value.unwrap(), b.value.unwrap());
                assert!((a - b).abs() <= 1e-8 * a, "{a} vs {b}");
            }
            if let Method::Ddroc { d, .. } = run.method {
                let set = AmbiguitySet::new(ProbabilityVector::uniform(8).unwrap(), d).unwrap();
                let worst = worst_expectation_greedy(&CostTable::new(run.hitting_times.clone()).unwrap(), &set)
                    .unwrap()
                    .value;
                assert!((worst - run.cost.unwrap()).abs() <= cfg.solver.tolerance * (1.0 + worst));
                assert!(run.dual.as_ref().unwrap().self_check_passed);
            }
        }
        let dir = tempfile::tempdir().unwrap();
        bundle.save(dir.path()).unwrap();
        assert_eq!(ResultBundle::load(dir.path()).unwrap(), bundle);
        let soc = RunResult::load(&dir.path().join("run_soc.json")).unwrap();
        assert_eq!(&soc, bundle.runs.last().unwrap());
    }

    #[test]
    fn soc_only_bundle() {
        let bundle = run_experiment(&small_config("c_list =\n")).unwrap();
        assert_eq!(bundle.runs.len(), 1);
        assert_eq!(bundle.runs[0].method, Method::Soc);
    }

    #[test]
    fn d_zero_rejected() {
        let e = run_experiment(&small_config("c_list = 8\n")).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "c_list"), "{e:?}");
    }

    #[test]
    fn evaluate_policy_rejects_foreign_graph() {
        let bundle = run_experiment(&small_config("c_list =\n")).unwrap();
        let graph = bundle.graph().unwrap();
        let chain = bundle.runs[0].chain(&graph).unwrap();
        let other = crate::graphgen::watts_strogatz(&crate::graphgen::WSParams::degree_three(8, 99)).unwrap();
        if other != graph {
            assert!(evaluate_policy(&chain, &other, &spec(8, vec![])).is_err());
        }
    }
}
