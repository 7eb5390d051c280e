//! First-order minimization of smooth convex objectives over polytopes of the
//! form `{y : A_eq y = b_eq, y >= lower}`.
//!
//! Projection onto the polytope is a small quadratic program, solved by a
//! primal-dual interior-point method and finished on the identified active
//! set. Dykstra's alternating projections between the affine subspace and the
//! box serve as the fallback. The minimizer is projected gradient descent
//! with a Barzilai-Borwein trial step and monotone Armijo backtracking along the
//! projection arc.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-point residual at which Dykstra's iteration stops.
pub const PROJECTION_TOLERANCE: f64 = 1e-10;
/// Equality residual, relative to `1 + max |b_eq|`, accepted from the
/// interior-point projection.
pub const INTERIOR_TOLERANCE: f64 = 1e-12;
const PROJECTION_MAX_ITERS: usize = 200_000;
const INTERIOR_MAX_ITERS: usize = 100;
/// Complementarity accepted when the Newton system breaks down near the end.
const INTERIOR_LOOSE_GAP: f64 = 1e-9;
const GRAM_SHIFT: f64 = 1e-9;
const GRAM_REFINE_STEPS: usize = 20;
const GRAM_REFINE_TOLERANCE: f64 = 1e-15;
/// A bound is pinned up front when its multiplier exceeds the slack by this factor.
const PIN_RATIO: f64 = 1e3;
const MAX_BACKTRACKS: usize = 80;
const STEP_MIN: f64 = 1e-14;
const STEP_MAX: f64 = 1e14;

/// Value and gradient of an objective at one point. A non-finite `value` marks
/// the point as outside the objective's domain.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: DVector<f64>,
}

pub trait ObjectiveOracle {
    fn dimension(&self) -> usize;
    fn evaluate(&self, x: &DVector<f64>) -> Evaluation;
}

/// Adapts a closure into an [`ObjectiveOracle`].
pub struct FnObjective<F> {
    dimension: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&DVector<f64>) -> Evaluation,
{
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F> ObjectiveOracle for FnObjective<F>
where
    F: Fn(&DVector<f64>) -> Evaluation,
{
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn evaluate(&self, x: &DVector<f64>) -> Evaluation {
        (self.f)(x)
    }
}

/// Affine equalities plus componentwise lower bounds (`-inf` allowed).
#[derive(Debug, Clone)]
pub struct PolytopeSpec {
    a_eq: DMatrix<f64>,
    b_eq: DVector<f64>,
    lower: DVector<f64>,
    // A A^T, factored once for the affine projection
    gram: Option<GramSolver>,
    // nonzeros of each column of A, for Gram matrices A diag(g) A^T
    columns: Vec<Vec<(usize, f64)>>,
}

impl PolytopeSpec {
    pub fn new(a_eq: DMatrix<f64>, b_eq: DVector<f64>, lower: DVector<f64>) -> Result<Self> {
        let n = lower.len();
        if n == 0 {
            return Err(Error::InvalidArgument("polytope of dimension 0".into()));
        }
        if a_eq.nrows() != b_eq.len() {
            return Err(Error::DimensionMismatch {
                expected: a_eq.nrows(),
                actual: b_eq.len(),
            });
        }
        if a_eq.nrows() > 0 && a_eq.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: a_eq.ncols(),
            });
        }
        if lower.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
            return Err(Error::InvalidArgument("lower bounds must be real or -inf".into()));
        }
        let a_eq = if a_eq.nrows() == 0 {
            DMatrix::zeros(0, n)
        } else {
            a_eq
        };
        let gram = if a_eq.nrows() == 0 {
            None
        } else {
            Some(GramSolver::new(&a_eq * a_eq.transpose()).ok_or_else(|| {
                Error::InvalidArgument("equality matrix has non-finite entries".into())
            })?)
        };
        let columns = (0..n)
            .map(|c| {
                a_eq.column(c)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(r, v)| (r, *v))
                    .collect()
            })
            .collect();
        let spec = Self {
            a_eq,
            b_eq,
            lower,
            gram,
            columns,
        };
        // nonemptiness check
        spec.project(&DVector::zeros(n))?;
        Ok(spec)
    }

    /// `A diag(weights) A^T`, skipping zero weights.
    fn weighted_gram(&self, weights: impl Fn(usize) -> f64) -> DMatrix<f64> {
        let rows = self.a_eq.nrows();
        let mut gram = DMatrix::zeros(rows, rows);
        for (c, nz) in self.columns.iter().enumerate() {
            let w = weights(c);
            if w == 0.0 {
                continue;
            }
            for &(r1, v1) in nz {
                for &(r2, v2) in nz {
                    gram[(r1, r2)] += w * v1 * v2;
                }
            }
        }
        gram
    }

    /// Box `{y >= lower}` with no equalities.
    pub fn lower_bounds(lower: DVector<f64>) -> Result<Self> {
        Self::new(DMatrix::zeros(0, lower.len()), DVector::zeros(0), lower)
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn equality_residual(&self, y: &DVector<f64>) -> f64 {
        if self.a_eq.nrows() == 0 {
            0.0
        } else {
            (&self.a_eq * y - &self.b_eq).amax()
        }
    }

    fn project_box(&self, y: &DVector<f64>) -> DVector<f64> {
        y.zip_map(&self.lower, |v, l| v.max(l))
    }

    fn project_affine(&self, y: &DVector<f64>) -> DVector<f64> {
        let Some(gram) = &self.gram else {
            return y.clone();
        };
        let residual = &self.a_eq * y - &self.b_eq;
        y - self.a_eq.transpose() * gram.solve(&residual)
    }

    /// Component of `v` parallel to the affine subspace `{A_eq y = b_eq}`.
    pub fn tangent(&self, v: &DVector<f64>) -> DVector<f64> {
        let Some(gram) = &self.gram else {
            return v.clone();
        };
        v - self.a_eq.transpose() * gram.solve(&(&self.a_eq * v))
    }

    pub fn project(&self, point: &DVector<f64>) -> Result<DVector<f64>> {
        project_polytope(point, self)
    }
}

/// Euclidean projection onto `P`.
pub fn project_polytope(point: &DVector<f64>, poly: &PolytopeSpec) -> Result<DVector<f64>> {
    if point.len() != poly.dimension() {
        return Err(Error::DimensionMismatch {
            expected: poly.dimension(),
            actual: point.len(),
        });
    }
    if poly.a_eq.nrows() == 0 {
        return Ok(poly.project_box(point));
    }
    if poly.lower.iter().all(|l| *l == f64::NEG_INFINITY) {
        let y = poly.project_affine(point);
        let residual = poly.equality_residual(&y);
        if residual > PROJECTION_TOLERANCE * (1.0 + poly.b_eq.amax()) {
            return Err(Error::Infeasible {
                iterations: 1,
                residual,
            });
        }
        return Ok(y);
    }
    match project_interior(point, poly) {
        Some(x) => Ok(x),
        None => {
            log::debug!("interior-point projection failed; falling back to dykstra");
            project_polytope_dykstra(point, poly)
        }
    }
}

/// Primal-dual interior-point solve (Mehrotra predictor-corrector) of
/// `min 1/2 |x - y|^2  s.t.  A x = b, x >= l`, followed by a clean-up on the
/// identified active set.
fn project_interior(point: &DVector<f64>, poly: &PolytopeSpec) -> Option<DVector<f64>> {
    let a = &poly.a_eq;
    let b = &poly.b_eq;
    let lower = &poly.lower;
    let n = point.len();
    let rows = a.nrows();
    let bounded: Vec<bool> = lower.iter().map(|l| l.is_finite()).collect();
    let nb = bounded.iter().filter(|&&f| f).count();
    let scale = 1.0 + point.amax().max(b.amax());
    let tol = INTERIOR_TOLERANCE * (1.0 + b.amax());
    let eps = 1e-15 * n as f64;

    // dual-feasible start: x - y - s = 0 on bounded coordinates
    let mut x = point.clone();
    let mut s: DVector<f64> = DVector::zeros(n);
    for i in (0..n).filter(|&i| bounded[i]) {
        let gap = point[i] - lower[i];
        x[i] = lower[i] + gap.max(0.0) + 1.0;
        s[i] = (-gap).max(0.0) + 1.0;
    }
    let mut mu = DVector::zeros(rows);

    let solve = |x: &DVector<f64>, s: &DVector<f64>, r_p: &DVector<f64>, r_d: &DVector<f64>, r_c: &DVector<f64>| {
        let mut g_inv = DVector::from_element(n, 1.0);
        let mut rhs = -r_d;
        for i in (0..n).filter(|&i| bounded[i]) {
            let v = x[i] - lower[i];
            g_inv[i] = 1.0 / (1.0 + s[i] / v);
            rhs[i] -= r_c[i] / v;
        }
        let mut m = poly.weighted_gram(|c| g_inv[c]);
        let shift = 1e-14 * (1.0 + m.diagonal().amax());
        for r in 0..rows {
            m[(r, r)] += shift;
        }
        let scaled = rhs.component_mul(&g_inv);
        let dmu = m.cholesky()?.solve(&(-r_p - a * &scaled));
        let dx = (a.transpose() * &dmu + &rhs).component_mul(&g_inv);
        let mut ds = DVector::zeros(n);
        for i in (0..n).filter(|&i| bounded[i]) {
            let v = x[i] - lower[i];
            ds[i] = (-r_c[i] - s[i] * dx[i]) / v;
        }
        Some((dx, dmu, ds))
    };
    let max_step = |x: &DVector<f64>, s: &DVector<f64>, dx: &DVector<f64>, ds: &DVector<f64>| {
        let mut alpha: f64 = 1.0;
        for i in (0..n).filter(|&i| bounded[i]) {
            if dx[i] < 0.0 {
                alpha = alpha.min(-(x[i] - lower[i]) / dx[i]);
            }
            if ds[i] < 0.0 {
                alpha = alpha.min(-s[i] / ds[i]);
            }
        }
        alpha
    };

    let mut done = false;
    for _ in 0..INTERIOR_MAX_ITERS {
        let r_p = a * &x - b;
        let mut r_d = &x - point - a.transpose() * &mu - &s;
        for i in (0..n).filter(|&i| !bounded[i]) {
            r_d[i] = x[i] - point[i] - a.column(i).dot(&mu);
        }
        let mut vs = DVector::zeros(n);
        for i in (0..n).filter(|&i| bounded[i]) {
            vs[i] = (x[i] - lower[i]) * s[i];
        }
        let gap = vs.sum() / nb as f64;
        if r_p.amax() <= tol && r_d.amax() <= eps * scale && gap <= eps * scale {
            done = true;
            break;
        }
        let breakdown_ok = r_p.amax() <= tol && gap <= INTERIOR_LOOSE_GAP * scale;
        let finite = |d: &(DVector<f64>, DVector<f64>, DVector<f64>)| {
            d.0.iter().chain(d.1.iter()).chain(d.2.iter()).all(|v| v.is_finite())
        };
        let Some((dx_a, _, ds_a)) = solve(&x, &s, &r_p, &r_d, &vs).filter(finite) else {
            done = breakdown_ok;
            break;
        };
        let alpha_a = max_step(&x, &s, &dx_a, &ds_a);
        let mut gap_a = 0.0;
        for i in (0..n).filter(|&i| bounded[i]) {
            gap_a += (x[i] - lower[i] + alpha_a * dx_a[i]) * (s[i] + alpha_a * ds_a[i]);
        }
        let sigma = (gap_a / nb as f64 / gap).clamp(0.0, 1.0).powi(3);
        let mut r_c = vs.clone();
        for i in (0..n).filter(|&i| bounded[i]) {
            r_c[i] += dx_a[i] * ds_a[i] - sigma * gap;
        }
        let Some((dx, dmu, ds)) = solve(&x, &s, &r_p, &r_d, &r_c).filter(finite) else {
            done = breakdown_ok;
            break;
        };
        let alpha = (0.995 * max_step(&x, &s, &dx, &ds)).min(1.0);
        x += alpha * dx;
        mu += alpha * dmu;
        s += alpha * ds;
        if !(x.iter().all(|v| v.is_finite()) && s.iter().all(|v| v.is_finite())) {
            return None;
        }
    }
    if !done {
        return None;
    }

    // The interior iterate is accurate only to about sqrt(gap) on degenerate
    // coordinates. Finish with a primal active-set pass: pin the clearly active
    // bounds, then repeatedly move toward the projection onto the current face,
    // stopping at the first bound hit and pinning it.
    let mut free: Vec<bool> = (0..n)
        .map(|i| !bounded[i] || (x[i] - lower[i]) * PIN_RATIO > s[i])
        .collect();
    let mut z = x.clone();
    for i in (0..n).filter(|&i| !free[i]) {
        z[i] = lower[i];
    }
    for _ in 0..=n {
        let face = face_projection(point, poly, &free)?;
        let d = &face - &z;
        let mut alpha = 1.0;
        let mut blocking = None;
        for i in 0..n {
            if bounded[i] && free[i] && d[i] < 0.0 {
                let room = (z[i] - lower[i]).max(0.0);
                let t = room / -d[i];
                if t < alpha {
                    alpha = t;
                    blocking = Some(i);
                }
            }
        }
        match blocking {
            None => {
                return ((a * &face - b).amax() <= tol).then_some(face);
            }
            Some(i) => {
                z += alpha * d;
                z[i] = lower[i];
                free[i] = false;
            }
        }
    }
    None
}

/// Minimum-norm solves `G x = r` for a positive semidefinite `G` and `r` in
/// its range: iterated Tikhonov steps `x += (G + d I)^{-1} (r - G x)` with a
/// small shift `d`. Each step shrinks the error on an eigenvalue `v` by
/// `d / (v + d)` and leaves the null space alone.
#[derive(Debug, Clone)]
struct GramSolver {
    gram: DMatrix<f64>,
    factor: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl GramSolver {
    fn new(gram: DMatrix<f64>) -> Option<Self> {
        if !gram.iter().all(|v| v.is_finite()) {
            return None;
        }
        let top = gram.diagonal().amax().max(f64::MIN_POSITIVE);
        let mut shifted = gram.clone();
        for r in 0..gram.nrows() {
            shifted[(r, r)] += GRAM_SHIFT * top;
        }
        let factor = shifted.cholesky()?;
        Some(Self { gram, factor })
    }

    fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        let mut x = self.factor.solve(r);
        let target = GRAM_REFINE_TOLERANCE * r.amax();
        for _ in 1..GRAM_REFINE_STEPS {
            let residual = r - &self.gram * &x;
            if residual.amax() <= target {
                break;
            }
            x += self.factor.solve(&residual);
        }
        x
    }
}

/// Projection of `y` onto `{A x = b, x_i = l_i for i not free}`.
fn face_projection(point: &DVector<f64>, poly: &PolytopeSpec, free: &[bool]) -> Option<DVector<f64>> {
    let (a, b, lower) = (&poly.a_eq, &poly.b_eq, &poly.lower);
    let n = point.len();
    let gram = GramSolver::new(poly.weighted_gram(|c| if free[c] { 1.0 } else { 0.0 }))?;
    let mut face = point.clone();
    for i in (0..n).filter(|&i| !free[i]) {
        face[i] = lower[i];
    }
    // second pass removes the round-off left by cancellation against large |y|
    for _ in 0..2 {
        let shift = a.transpose() * gram.solve(&(b - a * &face));
        for c in (0..n).filter(|&c| free[c]) {
            face[c] += shift[c];
        }
    }
    Some(face)
}

/// Euclidean projection onto `P` via Dykstra's scheme. Slow but simple; used
/// when the interior-point solve fails and as an independent check.
pub fn project_polytope_dykstra(point: &DVector<f64>, poly: &PolytopeSpec) -> Result<DVector<f64>> {
    if point.len() != poly.dimension() {
        return Err(Error::DimensionMismatch {
            expected: poly.dimension(),
            actual: point.len(),
        });
    }
    if poly.a_eq.nrows() == 0 {
        return Ok(poly.project_box(point));
    }
    let n = point.len();
    let mut x = point.clone();
    let mut p = DVector::zeros(n);
    let mut q = DVector::zeros(n);
    let mut residual = f64::INFINITY;
    for _ in 0..PROJECTION_MAX_ITERS {
        let a = poly.project_affine(&(&x + &p));
        p = &x + &p - &a;
        let b = poly.project_box(&(&a + &q));
        q = &a + &q - &b;
        residual = (&a - &b).amax();
        x = b;
        if residual <= PROJECTION_TOLERANCE {
            return Ok(x);
        }
    }
    Err(Error::Infeasible {
        iterations: PROJECTION_MAX_ITERS,
        residual,
    })
}

/// How the variable vector is updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// All coordinates move together.
    #[default]
    Joint,
    /// Cycle through caller-supplied coordinate blocks (debugging aid).
    Alternating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once the projected-gradient norm drops to this value.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Sufficient-decrease coefficient.
    pub armijo_c: f64,
    /// Backtracking ratio.
    pub armijo_rho: f64,
    /// Lower bound kept on Lagrange multipliers.
    pub lambda_floor: f64,
    pub strategy: Strategy,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iters: 50_000,
            armijo_c: 1e-4,
            armijo_rho: 0.5,
            lambda_floor: 1e-12,
            strategy: Strategy::Joint,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| {
            Err(Error::Config {
                key: key.into(),
                reason: reason.into(),
            })
        };
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad("tolerance", "must be > 0");
        }
        if self.max_iters == 0 {
            return bad("max_iters", "must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c", "must lie in (0, 1)");
        }
        if !(self.armijo_rho > 0.0 && self.armijo_rho < 1.0) {
            return bad("armijo_rho", "must lie in (0, 1)");
        }
        if !(self.lambda_floor.is_finite() && self.lambda_floor >= 0.0) {
            return bad("lambda_floor", "must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    /// `max_iters` reached; the solution is the best iterate.
    IterationLimit,
    /// Line search could not make progress at floating-point resolution.
    Stalled,
}

impl Status {
    pub fn converged(self) -> bool {
        self == Status::Converged
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub solution: DVector<f64>,
    pub value: f64,
    /// `|| x - P(x - grad f(x)) ||_2` at the solution.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub status: Status,
}

fn kkt_residual(
    x: &DVector<f64>,
    gradient: &DVector<f64>,
    poly: &PolytopeSpec,
) -> Result<f64> {
    Ok((x - project_polytope(&(x - gradient), poly)?).norm())
}

/// Projected gradient descent with Armijo backtracking.
///
/// The returned objective sequence is monotone nonincreasing; trial points where
/// the oracle reports a non-finite value are rejected by the line search.
pub fn minimize_smooth_convex(
    obj: &dyn ObjectiveOracle,
    poly: &PolytopeSpec,
    init: &DVector<f64>,
    opts: &SolverOptions,
) -> Result<Minimum> {
    minimize_with_blocks(obj, poly, init, opts, &[])
}

/// Same as [`minimize_smooth_convex`]; with [`Strategy::Alternating`] the
/// gradient is restricted to one block of coordinates at a time, cycling
/// through `blocks` every `sweep` iterations.
pub fn minimize_with_blocks(
    obj: &dyn ObjectiveOracle,
    poly: &PolytopeSpec,
    init: &DVector<f64>,
    opts: &SolverOptions,
    blocks: &[std::ops::Range<usize>],
) -> Result<Minimum> {
    opts.validate()?;
    let n = poly.dimension();
    if obj.dimension() != n || init.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: if obj.dimension() != n {
                obj.dimension()
            } else {
                init.len()
            },
        });
    }
    const SWEEP: usize = 50;
    let alternating = opts.strategy == Strategy::Alternating && blocks.len() > 1;

    // Along the feasible set only the tangential part of the gradient matters;
    // dropping the normal part changes no iterate in exact arithmetic and keeps
    // large normal components from swamping the line search in round-off.
    let evaluate = |x: &DVector<f64>| {
        let mut e = obj.evaluate(x);
        e.gradient = poly.tangent(&e.gradient);
        e
    };
    let mut x = project_polytope(init, poly)?;
    let mut eval = evaluate(&x);
    if !eval.value.is_finite() {
        return Err(Error::NonFiniteObjective);
    }

    let mut step = {
        let d = &x - project_polytope(&(&x - &eval.gradient), poly)?;
        let dn = d.amax();
        if dn > 0.0 {
            (1.0 / dn).clamp(STEP_MIN, STEP_MAX)
        } else {
            1.0
        }
    };

    let mut status = Status::IterationLimit;
    let mut iterations = 0;
    let mut block = 0;
    let mut block_iters = 0;
    let mut idle_blocks = 0;
    while iterations < opts.max_iters {
        let residual = kkt_residual(&x, &eval.gradient, poly)?;
        if residual <= opts.tolerance {
            status = Status::Converged;
            break;
        }
        iterations += 1;

        if alternating && block_iters == SWEEP {
            block = (block + 1) % blocks.len();
            block_iters = 0;
        }
        block_iters += 1;
        let direction = if alternating {
            let range = &blocks[block];
            let mut g = DVector::zeros(n);
            g.rows_mut(range.start, range.len())
                .copy_from(&eval.gradient.rows(range.start, range.len()));
            g
        } else {
            eval.gradient.clone()
        };

        let mut t = step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = project_polytope(&(&x - t * &direction), poly)?;
            let s = &trial - &x;
            if s.amax() == 0.0 {
                break;
            }
            let predicted = eval.gradient.dot(&s);
            let trial_eval = evaluate(&trial);
            if trial_eval.value.is_finite()
                && trial_eval.value <= eval.value + opts.armijo_c * predicted
            {
                accepted = Some((trial, trial_eval, s));
                break;
            }
            t *= opts.armijo_rho;
        }

        let Some((next, next_eval, s)) = accepted else {
            if alternating && idle_blocks + 1 < blocks.len() {
                // this block is stationary; try the next one
                idle_blocks += 1;
                block_iters = SWEEP;
                continue;
            }
            status = Status::Stalled;
            break;
        };
        idle_blocks = 0;
        debug_assert!(next_eval.value <= eval.value);

        let y = &next_eval.gradient - &eval.gradient;
        let sy = s.dot(&y);
        step = if sy > 0.0 {
            (s.norm_squared() / sy).clamp(STEP_MIN, STEP_MAX)
        } else {
            (t / opts.armijo_rho).clamp(STEP_MIN, STEP_MAX)
        };
        x = next;
        eval = next_eval;
    }

    let kkt = kkt_residual(&x, &eval.gradient, poly)?;
    if status != Status::Converged && kkt <= opts.tolerance {
        status = Status::Converged;
    }
    Ok(Minimum {
        solution: x,
        value: eval.value,
        kkt_residual: kkt,
        iterations,
        status,
    })
}
