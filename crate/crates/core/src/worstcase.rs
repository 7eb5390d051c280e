//! Worst-case expectations over the density-ratio ball.
//!
//! Two exact primal oracles (the greedy fractional-knapsack LP solution and the
//! worst-`c`-subset average for uniform nominals) and the smooth Lagrange dual
//!
//! ```text
//! D(lambda, nu) = sum_i q0(i) g~(f_i, lambda_i, nu)
//! g~ = nu                                                  if lambda_i = 0, f_i <= nu
//!    = (1+d) lambda_i exp((f_i - lambda_i - nu)/lambda_i) + nu   if lambda_i > 0
//!    = +inf                                                if lambda_i = 0, f_i > nu
//! ```
//!
//! whose infimum over `lambda >= 0, nu` equals the worst-case expectation
//! whenever `d > 0`.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::convexsolve::{
    minimize_smooth_convex, Evaluation, FnObjective, PolytopeSpec, SolverOptions, Status,
};
use crate::error::{Error, Result};
use crate::probspace::{AmbiguitySet, ProbabilityVector};

/// Real number or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            ExtendedReal::Finite(v)
        } else {
            ExtendedReal::Infinite
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }

    /// `+inf` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ExtendedReal::Finite(v)),
            Raw::Text(t) if t == "inf" => Ok(ExtendedReal::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {t:?}"))),
        }
    }
}

/// Per-outcome costs `f(x, i)` at a fixed decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    costs: Vec<f64>,
}

impl CostTable {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::InvalidArgument("empty cost table".into()));
        }
        if let Some(i) = costs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("cost {i} is not finite")));
        }
        Ok(Self { costs })
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.costs
    }

    pub fn max(&self) -> f64 {
        self.costs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.costs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Multipliers `lambda >= 0` (one per ratio constraint) and `nu` (normalization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    lambdas: Vec<f64>,
    nu: f64,
}

impl DualPoint {
    pub fn new(lambdas: Vec<f64>, nu: f64) -> Result<Self> {
        for (index, &value) in lambdas.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidMultiplier { index, value });
            }
        }
        if !nu.is_finite() {
            return Err(Error::InvalidArgument("nu must be finite".into()));
        }
        Ok(Self { lambdas, nu })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Worst-case value together with a distribution attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseResult {
    pub value: f64,
    pub witness: ProbabilityVector,
}

fn check_dims(costs: &CostTable, set: &AmbiguitySet) -> Result<()> {
    if costs.len() != set.len() {
        return Err(Error::DimensionMismatch {
            expected: set.len(),
            actual: costs.len(),
        });
    }
    Ok(())
}

/// Indices sorted by descending cost, ties by ascending index.
fn descending_order(costs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]).then(a.cmp(&b)));
    order
}

/// Exact `max_{p in A_d(q0)} E_p[f]` by filling the costliest outcomes up to
/// their cap `(1+d) q0(i)` until the mass is exhausted.
///
/// The optimal value does not depend on how ties are broken; the witness does
/// (ties go to the lower index first).
pub fn worst_expectation_greedy(costs: &CostTable, set: &AmbiguitySet) -> Result<WorstCaseResult> {
    check_dims(costs, set)?;
    let q0 = set.nominal().as_slice();
    let cap = set.ratio_cap();
    let order = descending_order(costs.as_slice());
    let mut mass = vec![0.0; costs.len()];
    let mut remaining = 1.0;
    for (rank, &i) in order.iter().enumerate() {
        if remaining <= 0.0 {
            break;
        }
        let limit = cap * q0[i];
        let last = rank + 1 == order.len();
        let take = if last || remaining <= limit {
            remaining
        } else {
            limit
        };
        mass[i] = take;
        remaining -= take;
    }
    let value = mass.iter().zip(costs.as_slice()).map(|(p, f)| p * f).sum();
    Ok(WorstCaseResult {
        value,
        witness: ProbabilityVector::new(mass)?,
    })
}

/// Largest average over `c` distinct outcomes (0-based indices, ascending).
///
/// Enumerates all `c`-subsets for `m <= 25`, otherwise ranks the costs; both
/// give the same value and the lexicographically smallest maximizing subset.
pub fn worst_subset_average(costs: &CostTable, c: usize) -> Result<(f64, Vec<usize>)> {
    if costs.len() <= ENUMERATION_LIMIT {
        worst_subset_average_enumerated(costs, c)
    } else {
        worst_subset_average_ranked(costs, c)
    }
}

pub const ENUMERATION_LIMIT: usize = 25;

fn check_subset_size(m: usize, c: usize) -> Result<()> {
    if c == 0 || c > m {
        return Err(Error::InvalidArgument(format!(
            "subset size {c} outside 1..={m}"
        )));
    }
    Ok(())
}

/// Sort-and-take-top-`c`.
pub fn worst_subset_average_ranked(costs: &CostTable, c: usize) -> Result<(f64, Vec<usize>)> {
    check_subset_size(costs.len(), c)?;
    let mut subset: Vec<usize> = descending_order(costs.as_slice()).into_iter().take(c).collect();
    subset.sort_unstable();
    let value = subset.iter().map(|&i| costs.as_slice()[i]).sum::<f64>() / c as f64;
    Ok((value, subset))
}

/// Exhaustive enumeration of all `c`-subsets in lexicographic order.
pub fn worst_subset_average_enumerated(costs: &CostTable, c: usize) -> Result<(f64, Vec<usize>)> {
    let m = costs.len();
    check_subset_size(m, c)?;
    let f = costs.as_slice();
    let mut idx: Vec<usize> = (0..c).collect();
    let mut best_sum = f64::NEG_INFINITY;
    let mut best = idx.clone();
    loop {
        let s: f64 = idx.iter().map(|&i| f[i]).sum();
        if s > best_sum {
            best_sum = s;
            best.copy_from_slice(&idx);
        }
        // advance to the next combination
        let mut k = c;
        while k > 0 && idx[k - 1] == m - c + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        idx[k - 1] += 1;
        for j in k..c {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok((best_sum / c as f64, best))
}

/// Partial derivatives of the dual objective.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGradient {
    pub lambda: Vec<f64>,
    pub nu: f64,
    pub costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualValue {
    pub value: ExtendedReal,
    /// Present only when every `lambda_i > 0` and the value is finite.
    pub gradient: Option<DualGradient>,
}

/// Evaluates `D(lambda, nu) = E_q0[g~]` with its gradient in `(lambda, nu, f)`.
pub fn dual_objective(costs: &CostTable, set: &AmbiguitySet, dp: &DualPoint) -> Result<DualValue> {
    check_dims(costs, set)?;
    if dp.lambdas.len() != costs.len() {
        return Err(Error::DimensionMismatch {
            expected: costs.len(),
            actual: dp.lambdas.len(),
        });
    }
    Ok(dual_objective_raw(
        costs.as_slice(),
        set.nominal().as_slice(),
        set.ratio_cap(),
        &dp.lambdas,
        dp.nu,
    ))
}

/// Unchecked core of [`dual_objective`]; `cap = 1 + d`.
pub(crate) fn dual_objective_raw(
    f: &[f64],
    q0: &[f64],
    cap: f64,
    lambdas: &[f64],
    nu: f64,
) -> DualValue {
    let m = f.len();
    let smooth = lambdas.iter().all(|&l| l > 0.0);
    let mut value = 0.0;
    let mut grad = if smooth {
        Some(DualGradient {
            lambda: vec![0.0; m],
            nu: 0.0,
            costs: vec![0.0; m],
        })
    } else {
        None
    };
    for i in 0..m {
        let l = lambdas[i];
        if l == 0.0 {
            if f[i] <= nu {
                value += q0[i] * nu;
                continue;
            }
            return DualValue {
                value: ExtendedReal::Infinite,
                gradient: None,
            };
        }
        let s = (f[i] - l - nu) / l;
        let e = cap * s.exp();
        let g = l * e + nu;
        if !g.is_finite() {
            return DualValue {
                value: ExtendedReal::Infinite,
                gradient: None,
            };
        }
        value += q0[i] * g;
        if let Some(grad) = grad.as_mut() {
            grad.lambda[i] = -q0[i] * e * s;
            grad.nu += q0[i] * (1.0 - e);
            grad.costs[i] = q0[i] * e;
        }
    }
    DualValue {
        value: ExtendedReal::from_f64(value),
        gradient: grad,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerDualSolution {
    pub dual: DualPoint,
    pub value: f64,
    pub status: Status,
    pub iterations: usize,
    pub kkt_residual: f64,
    /// The final point came from the profile search over `nu` rather than the
    /// projected-gradient iterate.
    pub refined: bool,
    /// Some multiplier ended on the floor, i.e. the true minimizer has
    /// `lambda_i = 0` and the infimum is only approached.
    pub floor_active: bool,
}

/// Closed-form minimizer of `D` over `lambda` for a fixed `nu`:
/// `lambda_i = max(f_i - nu, floor)`.
pub fn optimal_lambdas(costs: &[f64], nu: f64, floor: f64) -> Vec<f64> {
    costs.iter().map(|&f| (f - nu).max(floor)).collect()
}

/// Standard starting point: `lambda_i = max f - min f + 1`, `nu = E_q0[f]`.
pub fn default_dual_start(costs: &CostTable, set: &AmbiguitySet) -> DualPoint {
    let spread = costs.max() - costs.min() + 1.0;
    let nu = set
        .nominal()
        .expectation(costs.as_slice())
        .expect("dimensions checked by caller");
    DualPoint {
        lambdas: vec![spread; costs.len()],
        nu,
    }
}

/// Dual point obtained by eliminating `lambda` in closed form and minimizing
/// the remaining convex profile `nu -> D(lambda*(nu), nu)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ProfileMinimum {
    pub lambdas: Vec<f64>,
    pub nu: f64,
    pub value: f64,
}

/// Golden-section search on the profile over `[min f - 1, max f + 1]`, which
/// contains every minimizer.
pub(crate) fn minimize_dual_profile(f: &[f64], q0: &[f64], cap: f64, floor: f64) -> ProfileMinimum {
    let eval = |nu: f64| {
        let lambdas = optimal_lambdas(f, nu, floor);
        let v = dual_objective_raw(f, q0, cap, &lambdas, nu).value.to_f64();
        (v, lambdas)
    };
    let lo_f = f.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_f = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut a, mut b) = (lo_f - 1.0, hi_f + 1.0);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut v1, _) = eval(x1);
    let (mut v2, _) = eval(x2);
    for _ in 0..300 {
        if b - a <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if v1 <= v2 {
            b = x2;
            x2 = x1;
            v2 = v1;
            x1 = b - ratio * (b - a);
            v1 = eval(x1).0;
        } else {
            a = x1;
            x1 = x2;
            v1 = v2;
            x2 = a + ratio * (b - a);
            v2 = eval(x2).0;
        }
    }
    // the profile is piecewise linear; its kinks sit at the costs themselves
    let mut best_nu = if v1 <= v2 { x1 } else { x2 };
    let (mut best_v, mut best_l) = eval(best_nu);
    for &nu in f {
        let (v, l) = eval(nu);
        if v < best_v {
            best_v = v;
            best_nu = nu;
            best_l = l;
        }
    }
    ProfileMinimum {
        lambdas: best_l,
        nu: best_nu,
        value: best_v,
    }
}

/// Numerically minimizes the dual over `lambda >= floor, nu`. Requires `d > 0`.
///
/// Runs the profile search over `nu` with `lambda` eliminated in closed form,
/// then polishes that point with the projected-gradient solver and keeps the
/// lower of the two dual values. The infimum is typically approached with
/// some `lambda_i -> 0`, where first-order iterations from a generic start
/// such as [`default_dual_start`] slow down sharply.
pub fn inner_dual_minimize(
    costs: &CostTable,
    set: &AmbiguitySet,
    opts: &SolverOptions,
) -> Result<InnerDualSolution> {
    check_dims(costs, set)?;
    if !(set.radius() > 0.0) {
        return Err(Error::InvalidRadius(set.radius()));
    }
    opts.validate()?;
    let m = costs.len();
    let f = costs.as_slice().to_vec();
    let q0 = set.nominal().as_slice().to_vec();
    let cap = set.ratio_cap();

    let objective = FnObjective::new(m + 1, |z: &DVector<f64>| {
        let lambdas = &z.as_slice()[..m];
        let nu = z[m];
        let dv = dual_objective_raw(&f, &q0, cap, lambdas, nu);
        match (dv.value, dv.gradient) {
            (ExtendedReal::Finite(v), Some(g)) => {
                let mut grad = DVector::zeros(m + 1);
                grad.as_mut_slice()[..m].copy_from_slice(&g.lambda);
                grad[m] = g.nu;
                Evaluation { value: v, gradient: grad }
            }
            _ => Evaluation {
                value: f64::INFINITY,
                gradient: DVector::zeros(m + 1),
            },
        }
    });

    let mut lower = DVector::from_element(m + 1, opts.lambda_floor);
    lower[m] = f64::NEG_INFINITY;
    let poly = PolytopeSpec::lower_bounds(lower)?;

    let floor = opts.lambda_floor.max(f64::MIN_POSITIVE);
    let profile = minimize_dual_profile(&f, &q0, cap, floor);
    let mut init = DVector::from_element(m + 1, 0.0);
    init.as_mut_slice()[..m].copy_from_slice(&profile.lambdas);
    init[m] = profile.nu;

    let min = minimize_smooth_convex(&objective, &poly, &init, opts)?;
    let (lambdas, nu, value, status, refined) = if profile.value < min.value {
        (profile.lambdas, profile.nu, profile.value, Status::Converged, true)
    } else {
        (min.solution.as_slice()[..m].to_vec(), min.solution[m], min.value, min.status, false)
    };
    let floor_active = lambdas
        .iter()
        .any(|&l| l <= opts.lambda_floor * (1.0 + 1e-9) + f64::MIN_POSITIVE);
    Ok(InnerDualSolution {
        dual: DualPoint { lambdas, nu },
        value,
        status,
        iterations: min.iterations,
        kkt_residual: min.kkt_residual,
        refined,
        floor_active,
    })
}

/// Stationary point of the Lagrangean in the density ratio:
/// `p_i = q0_i (1+d) exp((f_i - lambda_i - nu)/lambda_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredDistribution {
    /// Raw, unnormalized mass.
    pub mass: Vec<f64>,
    /// `sum(mass) - 1`.
    pub mass_defect: f64,
}

impl RecoveredDistribution {
    /// Renormalized copy of the raw mass.
    pub fn normalized(&self) -> Result<ProbabilityVector> {
        ProbabilityVector::from_weights(&self.mass)
    }
}

pub fn recover_worst_distribution(
    costs: &CostTable,
    set: &AmbiguitySet,
    dp: &DualPoint,
) -> Result<RecoveredDistribution> {
    check_dims(costs, set)?;
    if dp.lambdas.len() != costs.len() {
        return Err(Error::DimensionMismatch {
            expected: costs.len(),
            actual: dp.lambdas.len(),
        });
    }
    if let Some(index) = dp.lambdas.iter().position(|&l| l <= 0.0) {
        return Err(Error::InvalidMultiplier {
            index,
            value: dp.lambdas[index],
        });
    }
    let cap = set.ratio_cap();
    let mass: Vec<f64> = costs
        .as_slice()
        .iter()
        .zip(set.nominal().as_slice())
        .zip(&dp.lambdas)
        .map(|((f, q), l)| q * cap * ((f - l - dp.nu) / l).exp())
        .collect();
    let mass_defect = mass.iter().sum::<f64>() - 1.0;
    Ok(RecoveredDistribution { mass, mass_defect })
}
