//! Chain design over the edge-weight polytope
//! `{w >= 0 : sum_{e ∋ j} w_e = pi_j for every node j}`.
//!
//! For a goal `i` with non-goal set `B`, the hitting time in these coordinates
//! is `f_i(w) = pi_B^T (D_B - W_BB)^{-1} pi_B` with `D = diag(pi)`, a convex
//! function of `w`. Its gradient is `u_j u_k` per matrix entry with
//! `u = (D_B - W_BB)^{-1} pi_B`, so one Cholesky solve per goal gives both.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::chain::{edge_weights_to_matrix, ReversibleChainParam};
use super::graph::Graph;
use crate::convexsolve::{
    minimize_with_blocks, Evaluation, Minimum, ObjectiveOracle, PolytopeSpec, SolverOptions, Status,
};
use crate::error::{Error, Result};
use crate::probspace::{AmbiguitySet, ProbabilityVector};
use crate::worstcase::{
    dual_objective_raw, minimize_dual_profile, worst_expectation_greedy,
    CostTable, DualPoint, ExtendedReal,
};

const PARALLEL_GOALS: usize = 24;
/// First multiplier floor, relative to the spread of the starting hitting times.
const CONTINUATION_START: f64 = 1e-1;
const CONTINUATION_RATIO: f64 = 0.1;
const MAX_STAGES: usize = 30;
const STAGE_CHUNK: usize = 250;
const STAGE_PROGRESS: f64 = 1e-9;

/// Hitting times of every goal and their gradients in edge-weight space.
#[derive(Debug, Clone)]
pub struct HittingProfile {
    pub values: Vec<f64>,
    /// `gradients[i][e] = d f_i / d w_e`.
    pub gradients: Vec<Vec<f64>>,
}

/// Edge-weight coordinates for a fixed graph and stationary distribution.
#[derive(Debug, Clone)]
pub struct EdgeParameterization {
    graph: Graph,
    edges: Vec<(usize, usize)>,
    pi: ProbabilityVector,
}

impl EdgeParameterization {
    pub fn new(graph: &Graph, pi: &ProbabilityVector) -> Result<Self> {
        if pi.len() != graph.node_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.node_count(),
                actual: pi.len(),
            });
        }
        if !pi.is_strictly_positive() {
            return Err(Error::InvalidChain(
                "stationary distribution must be strictly positive".into(),
            ));
        }
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(Self {
            graph: graph.clone(),
            edges: graph.edges().collect(),
            pi: pi.clone(),
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Node-edge incidence (self-loops count once) with right-hand side `pi`.
    pub fn constraint_matrix(&self, extra_columns: usize) -> (DMatrix<f64>, DVector<f64>) {
        let m = self.node_count();
        let mut a = DMatrix::zeros(m, self.edges.len() + extra_columns);
        for (e, &(j, k)) in self.edges.iter().enumerate() {
            a[(j, e)] = 1.0;
            a[(k, e)] = 1.0;
        }
        (a, DVector::from_column_slice(self.pi.as_slice()))
    }

    pub fn polytope(&self) -> Result<PolytopeSpec> {
        let (a, b) = self.constraint_matrix(0);
        PolytopeSpec::new(a, b, DVector::zeros(self.edges.len()))
    }

    /// Metropolis-type start: `w_jk = min(pi_j, pi_k) / (max degree + 1)` on
    /// edges, the remaining row mass on self-loops, then projected.
    pub fn metropolis_start(&self) -> Result<DVector<f64>> {
        let m = self.node_count();
        let max_degree = (0..m).map(|j| self.graph.neighbors(j).len()).max().unwrap_or(0);
        let denom = (max_degree + 1) as f64;
        let mut w = DVector::zeros(self.edges.len());
        let mut slack: Vec<f64> = self.pi.as_slice().to_vec();
        for (e, &(j, k)) in self.edges.iter().enumerate() {
            if j != k {
                let v = self.pi[j].min(self.pi[k]) / denom;
                w[e] = v;
                slack[j] -= v;
                slack[k] -= v;
            }
        }
        for (e, &(j, k)) in self.edges.iter().enumerate() {
            if j == k {
                w[e] = slack[j].max(0.0);
            }
        }
        self.polytope()?.project(&w)
    }

    pub fn weight_matrix(&self, w: &[f64]) -> DMatrix<f64> {
        edge_weights_to_matrix(&self.graph, w)
    }

    pub fn chain(&self, w: &[f64]) -> Result<ReversibleChainParam> {
        // clean projection round-off below the validation tolerance
        let cleaned: Vec<f64> = w.iter().map(|v| v.max(0.0)).collect();
        ReversibleChainParam::from_edge_weights(&self.graph, &cleaned, self.pi.clone())
    }

    /// Hitting time and gradient for one goal; `None` if `D_B - W_BB` is not
    /// positive definite (some node cannot reach the goal).
    pub fn goal_profile(&self, weights: &DMatrix<f64>, goal: usize) -> Option<(f64, Vec<f64>)> {
        let m = self.node_count();
        if m == 1 {
            return Some((0.0, vec![0.0; self.edges.len()]));
        }
        let others: Vec<usize> = (0..m).filter(|&j| j != goal).collect();
        let n = others.len();
        let mut k = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        for (a, &j) in others.iter().enumerate() {
            rhs[a] = self.pi[j];
            for (b, &l) in others.iter().enumerate() {
                k[(a, b)] = -weights[(j, l)];
            }
            k[(a, a)] += self.pi[j];
        }
        let chol = k.cholesky()?;
        let u_b = chol.solve(&rhs);
        let value = rhs.dot(&u_b);
        if !value.is_finite() {
            return None;
        }
        let mut u = vec![0.0; m];
        for (a, &j) in others.iter().enumerate() {
            u[j] = u_b[a];
        }
        let grad = self
            .edges
            .iter()
            .map(|&(j, l)| {
                if j == goal || l == goal {
                    0.0
                } else if j == l {
                    u[j] * u[j]
                } else {
                    2.0 * u[j] * u[l]
                }
            })
            .collect();
        Some((value, grad))
    }

    /// All goals at once; `None` if any hitting time is infinite.
    pub fn profile(&self, w: &[f64]) -> Option<HittingProfile> {
        let weights = self.weight_matrix(w);
        let m = self.node_count();
        let per_goal: Vec<Option<(f64, Vec<f64>)>> = if m >= PARALLEL_GOALS {
            (0..m).into_par_iter().map(|i| self.goal_profile(&weights, i)).collect()
        } else {
            (0..m).map(|i| self.goal_profile(&weights, i)).collect()
        };
        let mut values = Vec::with_capacity(m);
        let mut gradients = Vec::with_capacity(m);
        for entry in per_goal {
            let (v, g) = entry?;
            values.push(v);
            gradients.push(g);
        }
        Some(HittingProfile { values, gradients })
    }
}

/// `E_q0[f(w, i)]` over edge weights.
struct NominalObjective<'a> {
    param: &'a EdgeParameterization,
    q0: &'a [f64],
}

impl ObjectiveOracle for NominalObjective<'_> {
    fn dimension(&self) -> usize {
        self.param.edge_count()
    }

    fn evaluate(&self, x: &DVector<f64>) -> Evaluation {
        let Some(profile) = self.param.profile(x.as_slice()) else {
            return rejected(x.len());
        };
        let mut grad = DVector::zeros(x.len());
        let mut value = 0.0;
        for (i, q) in self.q0.iter().enumerate() {
            value += q * profile.values[i];
            for (g, d) in grad.iter_mut().zip(&profile.gradients[i]) {
                *g += q * d;
            }
        }
        Evaluation { value, gradient: grad }
    }
}

/// Joint dual objective over `(w, lambda, nu)`.
struct RobustObjective<'a> {
    param: &'a EdgeParameterization,
    q0: &'a [f64],
    cap: f64,
}

impl ObjectiveOracle for RobustObjective<'_> {
    fn dimension(&self) -> usize {
        self.param.edge_count() + self.q0.len() + 1
    }

    fn evaluate(&self, x: &DVector<f64>) -> Evaluation {
        let ne = self.param.edge_count();
        let m = self.q0.len();
        let z = x.as_slice();
        let Some(profile) = self.param.profile(&z[..ne]) else {
            return rejected(x.len());
        };
        let dv = dual_objective_raw(&profile.values, self.q0, self.cap, &z[ne..ne + m], z[ne + m]);
        let (ExtendedReal::Finite(value), Some(dg)) = (dv.value, dv.gradient) else {
            return rejected(x.len());
        };
        let mut grad = DVector::zeros(x.len());
        for i in 0..m {
            let weight = dg.costs[i];
            if weight != 0.0 {
                for (g, d) in grad.as_mut_slice()[..ne].iter_mut().zip(&profile.gradients[i]) {
                    *g += weight * d;
                }
            }
            grad[ne + i] = dg.lambda[i];
        }
        grad[ne + m] = dg.nu;
        Evaluation { value, gradient: grad }
    }
}

/// Runs the joint minimization in chunks, ending the stage early once a chunk
/// improves the objective by less than [`STAGE_PROGRESS`] (relative).
fn run_stage(
    objective: &RobustObjective<'_>,
    poly: &PolytopeSpec,
    start: &DVector<f64>,
    opts: &SolverOptions,
    blocks: &[std::ops::Range<usize>],
    budget: usize,
) -> Result<Minimum> {
    let mut used = 0;
    let mut current: Option<Minimum> = None;
    while used < budget {
        let chunk = STAGE_CHUNK.min(budget - used);
        let from = current.as_ref().map_or(start, |c| &c.solution);
        let chunk_opts = SolverOptions { max_iters: chunk, ..opts.clone() };
        let mut next = minimize_with_blocks(objective, poly, from, &chunk_opts, blocks)?;
        used += next.iterations;
        let stalled = next.iterations == 0
            || current.as_ref().is_some_and(|c| {
                c.value - next.value <= STAGE_PROGRESS * (1.0 + next.value.abs())
            });
        let finished = next.status != Status::IterationLimit || stalled;
        next.iterations = used;
        current = Some(next);
        if finished {
            break;
        }
    }
    current.ok_or_else(|| Error::Solver("empty stage budget".into()))
}

fn rejected(n: usize) -> Evaluation {
    Evaluation {
        value: f64::INFINITY,
        gradient: DVector::zeros(n),
    }
}

/// Outcome of a chain-design solve.
#[derive(Debug, Clone)]
pub struct PatrolSolution {
    pub chain: ReversibleChainParam,
    /// Objective actually minimized: nominal mean for SOC, worst-case
    /// expectation for DDROC.
    pub cost: f64,
    pub hitting_times: Vec<f64>,
    pub status: Status,
    pub iterations: usize,
    pub kkt_residual: f64,
    /// Support of the final chain is connected.
    pub irreducible: bool,
    /// Present for robust solves.
    pub robust: Option<RobustDetails>,
}

#[derive(Debug, Clone)]
pub struct RobustDetails {
    pub dual: DualPoint,
    /// Dual objective at the returned `(w, lambda, nu)`.
    pub dual_value: f64,
    /// `|dual_value - worst_cost| <= tolerance * (1 + |worst_cost|)`.
    pub self_check_passed: bool,
    pub floor_active: bool,
}

fn check_inputs(graph: &Graph, pi: &ProbabilityVector, q0: &ProbabilityVector) -> Result<EdgeParameterization> {
    if q0.len() != graph.node_count() {
        return Err(Error::DimensionMismatch {
            expected: graph.node_count(),
            actual: q0.len(),
        });
    }
    EdgeParameterization::new(graph, pi)
}

fn finish(
    param: &EdgeParameterization,
    w: &[f64],
    status: Status,
    iterations: usize,
    kkt_residual: f64,
) -> Result<(ReversibleChainParam, Vec<f64>, Status, usize, f64, bool)> {
    let chain = param.chain(w)?;
    let profile = param
        .profile(w)
        .ok_or_else(|| Error::Solver("final chain has an infinite hitting time".into()))?;
    let irreducible = chain.is_irreducible();
    if !irreducible {
        log::warn!("designed chain is not irreducible on its support");
    }
    Ok((chain, profile.values, status, iterations, kkt_residual, irreducible))
}

/// Minimizes the nominal expectation `E_q0[f]` over reversible chains on `graph`
/// with stationary distribution `pi`.
pub fn solve_patrol_soc(
    graph: &Graph,
    pi: &ProbabilityVector,
    q0: &ProbabilityVector,
    opts: &SolverOptions,
) -> Result<PatrolSolution> {
    solve_patrol_soc_from(graph, pi, q0, opts, None)
}

/// [`solve_patrol_soc`] from a caller-supplied edge-weight start (projected).
pub fn solve_patrol_soc_from(
    graph: &Graph,
    pi: &ProbabilityVector,
    q0: &ProbabilityVector,
    opts: &SolverOptions,
    init: Option<&[f64]>,
) -> Result<PatrolSolution> {
    let param = check_inputs(graph, pi, q0)?;
    let poly = param.polytope()?;
    let start = match init {
        Some(w) => poly.project(&DVector::from_column_slice(w))?,
        None => param.metropolis_start()?,
    };
    let objective = NominalObjective {
        param: &param,
        q0: q0.as_slice(),
    };
    let min = minimize_with_blocks(&objective, &poly, &start, opts, &[])?;
    let (chain, hitting_times, status, iterations, kkt_residual, irreducible) =
        finish(&param, min.solution.as_slice(), min.status, min.iterations, min.kkt_residual)?;
    let cost = q0.expectation(&hitting_times)?;
    Ok(PatrolSolution {
        chain,
        cost,
        hitting_times,
        status,
        iterations,
        kkt_residual,
        irreducible,
        robust: None,
    })
}

/// Minimizes the worst-case expectation of the hitting times over the
/// density-ratio ball, through the joint smooth program in `(w, lambda, nu)`.
pub fn solve_patrol_ddroc(
    graph: &Graph,
    pi: &ProbabilityVector,
    set: &AmbiguitySet,
    opts: &SolverOptions,
) -> Result<PatrolSolution> {
    solve_patrol_ddroc_from(graph, pi, set, opts, None)
}

pub fn solve_patrol_ddroc_from(
    graph: &Graph,
    pi: &ProbabilityVector,
    set: &AmbiguitySet,
    opts: &SolverOptions,
    init: Option<&[f64]>,
) -> Result<PatrolSolution> {
    if !(set.radius() > 0.0) {
        return Err(Error::InvalidRadius(set.radius()));
    }
    let param = check_inputs(graph, pi, set.nominal())?;
    let m = param.node_count();
    let ne = param.edge_count();
    let q0 = set.nominal().as_slice();
    let cap = set.ratio_cap();

    let w_poly = param.polytope()?;
    let w0 = match init {
        Some(w) => w_poly.project(&DVector::from_column_slice(w))?,
        None => param.metropolis_start()?,
    };
    let f0 = param
        .profile(w0.as_slice())
        .ok_or_else(|| Error::Solver("starting chain has an infinite hitting time".into()))?;

    let (a, b) = param.constraint_matrix(m + 1);
    let objective = RobustObjective { param: &param, q0, cap };
    let blocks = [0..ne, ne..ne + m + 1];

    // Continuation on the multiplier floor: large floors keep the joint
    // objective well conditioned, and each stage warm-starts the next.
    let spread = f0.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - f0.values.iter().copied().fold(f64::INFINITY, f64::min)
        + 1.0;
    let mut floors = Vec::new();
    let mut level = spread * CONTINUATION_START;
    while level > opts.lambda_floor * CONTINUATION_RATIO.recip() && floors.len() < MAX_STAGES {
        floors.push(level);
        level *= CONTINUATION_RATIO;
    }
    floors.push(opts.lambda_floor);

    let mut start = DVector::zeros(ne + m + 1);
    start.as_mut_slice()[..ne].copy_from_slice(w0.as_slice());
    let mut current_f = f0.values.clone();
    let mut total_iters = 0;
    let mut min = None;
    for (stage, &floor) in floors.iter().enumerate() {
        let refit = minimize_dual_profile(&current_f, q0, cap, floor.max(f64::MIN_POSITIVE));
        start.as_mut_slice()[ne..ne + m].copy_from_slice(&refit.lambdas);
        start[ne + m] = refit.nu;
        let mut lower = DVector::zeros(ne + m + 1);
        for i in 0..m {
            lower[ne + i] = floor;
        }
        lower[ne + m] = f64::NEG_INFINITY;
        let poly = PolytopeSpec::new(a.clone(), b.clone(), lower)?;
        let remaining = opts.max_iters.saturating_sub(total_iters).max(1);
        let budget = if stage + 1 == floors.len() {
            remaining
        } else {
            (remaining / (floors.len() - stage)).max(1)
        };
        let result = run_stage(&objective, &poly, &start, opts, &blocks, budget)?;
        total_iters += result.iterations;
        start = result.solution.clone();
        current_f = param
            .profile(&start.as_slice()[..ne])
            .ok_or_else(|| Error::Solver("iterate has an infinite hitting time".into()))?
            .values;
        min = Some(result);
    }
    let mut min = min.expect("at least one stage");
    min.iterations = total_iters;

    let w = &min.solution.as_slice()[..ne];
    let (chain, hitting_times, status, iterations, kkt_residual, irreducible) =
        finish(&param, w, min.status, min.iterations, min.kkt_residual)?;

    // re-fit (lambda, nu) exactly to the final hitting times; never increases
    // the objective
    let mut lambdas = min.solution.as_slice()[ne..ne + m].to_vec();
    let mut nu = min.solution[ne + m];
    let mut dual_value = min.value;
    let floor = opts.lambda_floor.max(f64::MIN_POSITIVE);
    let refit = minimize_dual_profile(&hitting_times, q0, cap, floor);
    if refit.value < dual_value {
        lambdas = refit.lambdas;
        nu = refit.nu;
        dual_value = refit.value;
    }

    let worst = worst_expectation_greedy(&CostTable::new(hitting_times.clone())?, set)?.value;
    let self_check_passed = (dual_value - worst).abs() <= opts.tolerance * (1.0 + worst.abs());
    if !self_check_passed {
        log::warn!("dual value {dual_value} differs from worst-case expectation {worst}");
    }
    let floor_active = lambdas.iter().any(|&l| l <= floor * (1.0 + 1e-9));
    if floor_active {
        log::debug!("some multipliers rest on the floor {floor}");
    }
    Ok(PatrolSolution {
        chain,
        cost: worst,
        hitting_times,
        status,
        iterations,
        kkt_residual,
        irreducible,
        robust: Some(RobustDetails {
            dual: DualPoint::new(lambdas, nu)?,
            dual_value,
            self_check_passed,
            floor_active,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patrol::hitting::{hitting_time_gradient, hitting_time_vector, mean_hitting_time};
    use proptest::prelude::*;

    fn uniform(m: usize) -> ProbabilityVector {
        ProbabilityVector::uniform(m).unwrap()
    }

    fn ring_with_loops(m: usize) -> Graph {
        let mut g = Graph::new(m).unwrap();
        for j in 0..m {
            g.add_edge(j, j).unwrap();
            g.add_edge(j, (j + 1) % m).unwrap();
        }
        g
    }

    /// Five nodes, loops everywhere, a chord and a pendant.
    fn house() -> Graph {
        Graph::from_edges(
            5,
            [(0, 0), (1, 1), (2, 2), (3, 3), (4, 4), (0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (3, 4)],
        )
        .unwrap()
    }

    fn house_pi() -> ProbabilityVector {
        ProbabilityVector::new(vec![0.3, 0.2, 0.2, 0.2, 0.1]).unwrap()
    }

    fn formula_times(chain: &ReversibleChainParam) -> Vec<f64> {
        hitting_time_vector(chain).unwrap().into_iter().map(|h| h.to_f64()).collect()
    }

    #[test]
    fn two_node_graph_has_a_single_feasible_chain() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let opts = SolverOptions::default();
        let soc = solve_patrol_soc(&g, &uniform(2), &uniform(2), &opts).unwrap();
        assert!((soc.chain.weights()[(0, 1)] - 0.5).abs() < 1e-12);
        assert!((soc.cost - 0.5).abs() < 1e-12);

        let set = AmbiguitySet::new(uniform(2), AmbiguitySet::radius_for_subset_size(2, 1).unwrap()).unwrap();
        let robust = solve_patrol_ddroc(&g, &uniform(2), &set, &opts).unwrap();
        assert!((robust.chain.weights() - soc.chain.weights()).amax() < 1e-12);
        let max = robust.hitting_times.iter().copied().fold(0.0, f64::max);
        assert!((robust.cost - max).abs() < 1e-9);
        assert!(robust.robust.unwrap().self_check_passed);
    }

    #[test]
    fn triangle_beats_uniform_chain() {
        let g = Graph::from_edges(3, [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]).unwrap();
        let soc = solve_patrol_soc(&g, &uniform(3), &uniform(3), &SolverOptions::default()).unwrap();
        // uniform chain P = 1/3 has mean hitting time 2 for every goal
        assert!(soc.cost <= 2.0 + 1e-12, "{}", soc.cost);
        let times = formula_times(&soc.chain);
        let mean: f64 = times.iter().sum::<f64>() / 3.0;
        assert!((mean - soc.cost).abs() < 1e-9);
    }

    #[test]
    fn six_ring_matches_grid_search() {
        // alternating edge weights a, b with loops 1/6 - a - b span the
        // rotation-by-two symmetric chains
        let m = 6;
        let g = ring_with_loops(m);
        let pi = uniform(m);
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let cost = |a: f64, b: f64| {
            let mut w = DMatrix::zeros(m, m);
            for &(j, k) in &edges {
                let v = if j == k {
                    1.0 / 6.0 - a - b
                } else if j.min(k) % 2 == 0 && !(j == 0 && k == m - 1) {
                    a
                } else {
                    b
                };
                w[(j, k)] = v.max(0.0);
                w[(k, j)] = v.max(0.0);
            }
            let chain = crate::patrol::chain_from_weights(&g, w, pi.clone()).ok()?;
            let times: Vec<f64> = (0..m).map(|i| mean_hitting_time(&chain, i).unwrap().to_f64()).collect();
            Some(times.iter().sum::<f64>() / m as f64)
        };
        let steps = 240;
        let h = 1.0 / 6.0 / steps as f64;
        let mut best = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                if let Some(v) = cost(i as f64 * h, j as f64 * h) {
                    if v.is_finite() {
                        best = best.min(v);
                    }
                }
            }
        }
        let soc = solve_patrol_soc(&g, &pi, &pi, &SolverOptions::default()).unwrap();
        assert!((soc.cost - best).abs() <= 1e-3, "solver {} grid {best}", soc.cost);
    }

    #[test]
    fn tiny_radius_matches_nominal_design() {
        let opts = SolverOptions::default();
        let soc = solve_patrol_soc(&house(), &house_pi(), &uniform(5), &opts).unwrap();
        let set = AmbiguitySet::new(uniform(5), 1e-7).unwrap();
        let robust = solve_patrol_ddroc(&house(), &house_pi(), &set, &opts).unwrap();
        assert!(robust.cost >= soc.cost - 1e-6);
        assert!((robust.cost - soc.cost).abs() <= 1e-5 * soc.cost, "{} vs {}", robust.cost, soc.cost);
    }

    #[test]
    fn robust_design_lowers_the_worst_goal() {
        let opts = SolverOptions::default();
        let soc = solve_patrol_soc(&house(), &house_pi(), &uniform(5), &opts).unwrap();
        let set = AmbiguitySet::new(uniform(5), AmbiguitySet::radius_for_subset_size(5, 1).unwrap()).unwrap();
        let robust = solve_patrol_ddroc(&house(), &house_pi(), &set, &opts).unwrap();
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(max(&robust.hitting_times) <= max(&soc.hitting_times) + 1e-9);
        assert!((robust.cost - max(&robust.hitting_times)).abs() < 1e-6);
        let details = robust.robust.as_ref().unwrap();
        assert!(details.self_check_passed);
        assert!(robust.irreducible && soc.irreducible);
    }

    #[test]
    fn designed_chains_are_stationary_and_reversible() {
        let opts = SolverOptions::default();
        let set = AmbiguitySet::new(uniform(5), 1.5).unwrap();
        for sol in [
            solve_patrol_soc(&house(), &house_pi(), &uniform(5), &opts).unwrap(),
            solve_patrol_ddroc(&house(), &house_pi(), &set, &opts).unwrap(),
        ] {
            let c = &sol.chain;
            assert!(c.stationarity_residual() <= 1e-10);
            let p = c.transition_matrix();
            for j in 0..5 {
                assert!((p.row(j).sum() - 1.0).abs() <= 1e-10);
                for k in 0..5 {
                    assert!((c.pi()[j] * p[(j, k)] - c.pi()[k] * p[(k, j)]).abs() <= 1e-12);
                }
            }
            let times = formula_times(c);
            for (a, b) in times.iter().zip(&sol.hitting_times) {
                assert!((a - b).abs() <= 1e-9 * a.max(1.0));
            }
        }
    }

    fn random_feasible(param: &EdgeParameterization, raw: &[f64]) -> DVector<f64> {
        param.polytope().unwrap().project(&DVector::from_column_slice(raw)).unwrap()
    }

    #[test]
    fn edge_gradient_matches_finite_differences_and_matrix_route() {
        let g = house();
        let param = EdgeParameterization::new(&g, &house_pi()).unwrap();
        let w = random_feasible(&param, &[0.1, 0.03, 0.05, 0.02, 0.04, 0.07, 0.06, 0.05, 0.04, 0.03, 0.02]);
        let profile = param.profile(w.as_slice()).unwrap();
        let chain = param.chain(w.as_slice()).unwrap();
        let step = 1e-6;
        for goal in 0..5 {
            let p_grad = hitting_time_gradient(&chain, goal).unwrap();
            for (e, &(j, k)) in param.edges().iter().enumerate() {
                let mut plus = w.clone();
                plus[e] += step;
                let mut minus = w.clone();
                minus[e] -= step;
                let f = |x: &DVector<f64>| param.goal_profile(&param.weight_matrix(x.as_slice()), goal).unwrap().0;
                let fd = (f(&plus) - f(&minus)) / (2.0 * step);
                let analytic = profile.gradients[goal][e];
                assert!(
                    (fd - analytic).abs() <= 1e-5 * analytic.abs().max(1.0),
                    "goal {goal} edge {e}: {fd} vs {analytic}"
                );
                // dP(j,k)/dw = 1/pi_j and dP(k,j)/dw = 1/pi_k
                let pi = chain.pi();
                let via_p = if j == k {
                    p_grad[(j, j)] / pi[j]
                } else {
                    p_grad[(j, k)] / pi[j] + p_grad[(k, j)] / pi[k]
                };
                assert!((via_p - analytic).abs() <= 1e-8 * analytic.abs().max(1.0));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hitting_time_is_midpoint_convex_in_w(
            a in prop::collection::vec(0.0f64..0.1, 11),
            b in prop::collection::vec(0.0f64..0.1, 11),
            goal in 0usize..5,
        ) {
            let param = EdgeParameterization::new(&house(), &house_pi()).unwrap();
            let x = random_feasible(&param, &a);
            let y = random_feasible(&param, &b);
            let mid = (&x + &y) * 0.5;
            let f = |w: &DVector<f64>| param.profile(w.as_slice()).map(|p| p.values[goal]);
            if let (Some(fx), Some(fy), Some(fm)) = (f(&x), f(&y), f(&mid)) {
                prop_assert!(fm <= 0.5 * (fx + fy) + 1e-9 * (1.0 + fx.abs().max(fy.abs())));
            }
        }
    }
}
