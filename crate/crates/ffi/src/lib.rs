//! C ABI over the `ddroc` toolkit.
//!
//! Every fallible call returns a [`DdrocStatus`]; on failure the message is
//! kept per thread and read back with [`ddroc_last_error_message`]. Graphs and
//! solutions are opaque handles released with their `_free` functions.
//! Output arrays are caller-allocated with the documented length.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ddroc::convexsolve::{SolverOptions, Strategy};
use ddroc::graphgen::{load_graph, watts_strogatz, WSParams};
use ddroc::patrol::{solve_patrol_ddroc, solve_patrol_soc, Graph, PatrolSolution};
use ddroc::worstcase::{inner_dual_minimize, worst_expectation_greedy};
use ddroc::{AmbiguitySet, CostTable, Error, ProbabilityVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdrocStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidProbability = 4,
    InvalidGraph = 5,
    Infeasible = 6,
    Solver = 7,
    Unreachable = 8,
    Parse = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

impl From<&Error> for DdrocStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } => DdrocStatus::DimensionMismatch,
            Error::InvalidProbability(_) | Error::ZeroNominal { .. } => DdrocStatus::InvalidProbability,
            Error::InvalidGraph(_) | Error::InvalidChain(_) => DdrocStatus::InvalidGraph,
            Error::Infeasible { .. } => DdrocStatus::Infeasible,
            Error::Solver(_) | Error::NonFiniteObjective | Error::TrajectoryCap { .. } => DdrocStatus::Solver,
            Error::Unreachable { .. } => DdrocStatus::Unreachable,
            Error::Parse { .. } | Error::Config { .. } => DdrocStatus::Parse,
            Error::Io(_) => DdrocStatus::Io,
            Error::InvalidRadius(_) | Error::InvalidArgument(_) | Error::InvalidMultiplier { .. } => {
                DdrocStatus::InvalidArgument
            }
        }
    }
}

/// Projected-gradient settings; see [`ddroc_solver_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DdrocSolverOptions {
    pub tolerance: f64,
    pub max_iters: usize,
    pub armijo_c: f64,
    pub armijo_rho: f64,
    pub lambda_floor: f64,
}

impl From<&DdrocSolverOptions> for SolverOptions {
    fn from(o: &DdrocSolverOptions) -> Self {
        SolverOptions {
            tolerance: o.tolerance,
            max_iters: o.max_iters,
            armijo_c: o.armijo_c,
            armijo_rho: o.armijo_rho,
            lambda_floor: o.lambda_floor,
            strategy: Strategy::Joint,
        }
    }
}

/// Opaque undirected graph.
pub struct DdrocGraph(Graph);

/// Opaque result of a chain-design solve.
pub struct DdrocSolution(PatrolSolution);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

struct Failure(DdrocStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(DdrocStatus::from(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(DdrocStatus::NullPointer, format!("`{name}` is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DdrocStatus {
    let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(Failure(DdrocStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            set_last_error(String::new());
            DdrocStatus::Ok
        }
        Err(Failure(status, message)) => {
            set_last_error(message);
            status
        }
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if data.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn out_slice<'a>(data: *mut f64, len: usize, needed: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if data.is_null() {
        return Err(null(name));
    }
    if len < needed {
        return Err(Failure(
            DdrocStatus::BufferTooSmall,
            format!("`{name}` holds {len} values, {needed} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(data, needed))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn graph_ref<'a>(graph: *const DdrocGraph) -> Result<&'a Graph, Failure> {
    graph.as_ref().map(|g| &g.0).ok_or_else(|| null("graph"))
}

unsafe fn solution_ref<'a>(solution: *const DdrocSolution) -> Result<&'a PatrolSolution, Failure> {
    solution.as_ref().map(|s| &s.0).ok_or_else(|| null("solution"))
}

unsafe fn ambiguity_set(q0: *const f64, m: usize, radius: f64) -> Result<AmbiguitySet, Failure> {
    let q0 = ProbabilityVector::new(slice(q0, m, "q0")?.to_vec())?;
    Ok(AmbiguitySet::new(q0, radius)?)
}

unsafe fn options(opts: *const DdrocSolverOptions) -> SolverOptions {
    opts.as_ref().map(SolverOptions::from).unwrap_or_default()
}

/// Copies the calling thread's last error message (empty after a success)
/// into `buf` as a NUL-terminated string, truncating to `len - 1` bytes.
/// Returns the full message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` is null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ddroc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

#[no_mangle]
pub extern "C" fn ddroc_solver_options_default() -> DdrocSolverOptions {
    let o = SolverOptions::default();
    DdrocSolverOptions {
        tolerance: o.tolerance,
        max_iters: o.max_iters,
        armijo_c: o.armijo_c,
        armijo_rho: o.armijo_rho,
        lambda_floor: o.lambda_floor,
    }
}

/// Radius `m / c - 1` whose worst case averages the `c` largest costs
/// under a uniform nominal.
///
/// # Safety
/// `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ddroc_radius_for_subset_size(m: usize, c: usize, out: *mut f64) -> DdrocStatus {
    guard(|| write(out, AmbiguitySet::radius_for_subset_size(m, c)?, "out"))
}

/// Worst-case expectation of `costs` over the density-ratio ball of
/// `radius` around `q0`. `witness` (length `m`) receives a maximizing
/// distribution when non-null.
///
/// # Safety
/// `costs` and `q0` are valid for `m` reads, `value` for one write and
/// `witness` is null or valid for `m` writes.
#[no_mangle]
pub unsafe extern "C" fn ddroc_worst_expectation(
    costs: *const f64,
    q0: *const f64,
    m: usize,
    radius: f64,
    value: *mut f64,
    witness: *mut f64,
) -> DdrocStatus {
    guard(|| {
        let set = ambiguity_set(q0, m, radius)?;
        let table = CostTable::new(slice(costs, m, "costs")?.to_vec())?;
        let result = worst_expectation_greedy(&table, &set)?;
        if !witness.is_null() {
            out_slice(witness, m, m, "witness")?.copy_from_slice(result.witness.as_slice());
        }
        write(value, result.value, "value")
    })
}

/// Minimizes the smooth dual of the worst-case expectation. `lambdas`
/// (length `m`) and `nu` receive the dual point when non-null. A null
/// `opts` selects the defaults.
///
/// # Safety
/// As [`ddroc_worst_expectation`]; `opts` is null or points to a valid
/// options struct and `nu` is null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ddroc_inner_dual(
    costs: *const f64,
    q0: *const f64,
    m: usize,
    radius: f64,
    opts: *const DdrocSolverOptions,
    value: *mut f64,
    lambdas: *mut f64,
    nu: *mut f64,
) -> DdrocStatus {
    guard(|| {
        let set = ambiguity_set(q0, m, radius)?;
        let table = CostTable::new(slice(costs, m, "costs")?.to_vec())?;
        let sol = inner_dual_minimize(&table, &set, &options(opts))?;
        if !lambdas.is_null() {
            out_slice(lambdas, m, m, "lambdas")?.copy_from_slice(sol.dual.lambdas());
        }
        if !nu.is_null() {
            nu.write(sol.dual.nu());
        }
        write(value, sol.value, "value")
    })
}

/// Creates a graph with `node_count` nodes and no edges.
///
/// # Safety
/// `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ddroc_graph_new(node_count: usize, out: *mut *mut DdrocGraph) -> DdrocStatus {
    guard(|| {
        let g = Graph::new(node_count)?;
        write(out, Box::into_raw(Box::new(DdrocGraph(g))), "out")
    })
}

/// Adds the undirected edge `{j, k}`; `j == k` adds a self-loop.
///
/// # Safety
/// `graph` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddroc_graph_add_edge(graph: *mut DdrocGraph, j: usize, k: usize) -> DdrocStatus {
    guard(|| {
        let g = graph.as_mut().ok_or_else(|| null("graph"))?;
        Ok(g.0.add_edge(j, k)?)
    })
}

/// Reads a graph file: an `m <node_count>` header, then one 1-based `j k`
/// pair per line.
///
/// # Safety
/// `path` is a NUL-terminated UTF-8 string and `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ddroc_graph_load(path: *const c_char, out: *mut *mut DdrocGraph) -> DdrocStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|e| Failure(DdrocStatus::InvalidArgument, format!("path is not UTF-8: {e}")))?;
        let g = load_graph(Path::new(path))?;
        write(out, Box::into_raw(Box::new(DdrocGraph(g))), "out")
    })
}

/// Seeded Watts-Strogatz small-world graph.
///
/// # Safety
/// `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ddroc_graph_watts_strogatz(
    n: usize,
    ring_neighbors: usize,
    beta: f64,
    with_self_loops: bool,
    seed: u64,
    out: *mut *mut DdrocGraph,
) -> DdrocStatus {
    guard(|| {
        let g = watts_strogatz(&WSParams {
            n,
            ring_neighbors,
            beta,
            with_self_loops,
            seed,
        })?;
        write(out, Box::into_raw(Box::new(DdrocGraph(g))), "out")
    })
}

/// Returns 0 for a null handle.
///
/// # Safety
/// `graph` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddroc_graph_node_count(graph: *const DdrocGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

/// Number of undirected edges, self-loops included; 0 for a null handle.
///
/// # Safety
/// `graph` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddroc_graph_edge_count(graph: *const DdrocGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// # Safety
/// `graph` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddroc_graph_free(graph: *mut DdrocGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Designs the reversible chain on `graph` with stationary distribution `pi`
/// that minimizes the `q0`-expected mean hitting time. `pi` and `q0` have
/// one entry per node; a null `opts` selects the defaults.
///
/// # Safety
/// `graph` is a live handle, `pi` and `q0` are valid for `node_count`
/// reads, `opts` is null or valid and `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ddroc_solve_nominal(
    graph: *const DdrocGraph,
    pi: *const f64,
    q0: *const f64,
    opts: *const DdrocSolverOptions,
    out: *mut *mut DdrocSolution,
) -> DdrocStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let m = g.node_count();
        let pi = ProbabilityVector::new(slice(pi, m, "pi")?.to_vec())?;
        let q0 = ProbabilityVector::new(slice(q0, m, "q0")?.to_vec())?;
        let sol = solve_patrol_soc(g, &pi, &q0, &options(opts))?;
        write(out, Box::into_raw(Box::new(DdrocSolution(sol))), "out")
    })
}

/// As [`ddroc_solve_nominal`], minimizing the worst-case expected hitting
/// time over the density-ratio ball of `radius` around `q0`.
///
/// # Safety
/// As [`ddroc_solve_nominal`].
#[no_mangle]
pub unsafe extern "C" fn ddroc_solve_robust(
    graph: *const DdrocGraph,
    pi: *const f64,
    q0: *const f64,
    radius: f64,
    opts: *const DdrocSolverOptions,
    out: *mut *mut DdrocSolution,
) -> DdrocStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let m = g.node_count();
        let pi = ProbabilityVector::new(slice(pi, m, "pi")?.to_vec())?;
        let set = ambiguity_set(q0, m, radius)?;
        let sol = solve_patrol_ddroc(g, &pi, &set, &options(opts))?;
        write(out, Box::into_raw(Box::new(DdrocSolution(sol))), "out")
    })
}

/// Returns 0 for a null handle.
///
/// # Safety
/// `solution` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddroc_solution_node_count(solution: *const DdrocSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.chain.node_count())
}

/// Objective value: nominal mean for nominal solves, worst-case
/// expectation for robust ones. NaN for a null handle.
///
/// # Safety
/// `solution` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddroc_solution_cost(solution: *const DdrocSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.0.cost)
}

/// Mean hitting time of every goal node, `len >= node_count`.
///
/// # Safety
/// `solution` is a live handle and `out` is valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ddroc_solution_hitting_times(
    solution: *const DdrocSolution,
    out: *mut f64,
    len: usize,
) -> DdrocStatus {
    guard(|| {
        let s = solution_ref(solution)?;
        out_slice(out, len, s.hitting_times.len(), "out")?.copy_from_slice(&s.hitting_times);
        Ok(())
    })
}

/// Row-major transition matrix, `len >= node_count * node_count`.
///
/// # Safety
/// `solution` is a live handle and `out` is valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ddroc_solution_transition(
    solution: *const DdrocSolution,
    out: *mut f64,
    len: usize,
) -> DdrocStatus {
    guard(|| {
        let s = solution_ref(solution)?;
        let p = s.chain.transition_matrix();
        let m = p.nrows();
        let dst = out_slice(out, len, m * m, "out")?;
        for j in 0..m {
            for k in 0..m {
                dst[j * m + k] = p[(j, k)];
            }
        }
        Ok(())
    })
}

/// # Safety
/// `solution` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddroc_solution_free(solution: *mut DdrocSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}
