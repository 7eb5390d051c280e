//! pi-weighted mean hitting times `f(P, i) = pi^T (I - E P E)^{-1} delta`, where
//! `delta` is the indicator of the non-goal nodes and `E = diag(delta)`.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::chain::{support_adjacency, ReversibleChainParam};
use crate::error::{Error, Result};
use crate::worstcase::ExtendedReal;

/// Steps after which a single simulated trajectory is abandoned.
pub const TRAJECTORY_CAP: usize = 1_000_000;

fn check_goal(chain: &ReversibleChainParam, goal: usize) -> Result<()> {
    if goal >= chain.node_count() {
        return Err(Error::InvalidArgument(format!(
            "goal {goal} outside 0..{}",
            chain.node_count()
        )));
    }
    Ok(())
}

/// Every node can reach `goal` along positive-probability transitions.
fn goal_reachable_from_all(chain: &ReversibleChainParam, goal: usize) -> bool {
    // support is symmetric, so reachability *to* the goal equals reachability from it
    let adj = support_adjacency(chain.weights());
    super::graph::reachable_count(&adj, goal) == chain.node_count()
}

/// `M = I - E P E` for the given goal.
fn restricted_system(p: &DMatrix<f64>, goal: usize) -> DMatrix<f64> {
    let m = p.nrows();
    let mut mat = DMatrix::identity(m, m);
    for j in 0..m {
        if j == goal {
            continue;
        }
        for k in 0..m {
            if k != goal {
                mat[(j, k)] -= p[(j, k)];
            }
        }
    }
    mat
}

fn non_goal_indicator(m: usize, goal: usize) -> DVector<f64> {
    let mut delta = DVector::from_element(m, 1.0);
    delta[goal] = 0.0;
    delta
}

/// Mean number of steps to first reach `goal`, starting from `pi`.
///
/// Returns [`ExtendedReal::Infinite`] when some node cannot reach the goal.
pub fn mean_hitting_time(chain: &ReversibleChainParam, goal: usize) -> Result<ExtendedReal> {
    check_goal(chain, goal)?;
    let m = chain.node_count();
    if m == 1 {
        return Ok(ExtendedReal::Finite(0.0));
    }
    if !goal_reachable_from_all(chain, goal) {
        return Ok(ExtendedReal::Infinite);
    }
    let p = chain.transition_matrix();
    let system = restricted_system(&p, goal);
    let delta = non_goal_indicator(m, goal);
    let Some(y) = system.lu().solve(&delta) else {
        return Ok(ExtendedReal::Infinite);
    };
    let pi = DVector::from_column_slice(chain.pi().as_slice());
    Ok(ExtendedReal::from_f64(pi.dot(&y)))
}

/// Hitting times for every goal node, in node order.
pub fn hitting_time_vector(chain: &ReversibleChainParam) -> Result<Vec<ExtendedReal>> {
    (0..chain.node_count())
        .map(|i| mean_hitting_time(chain, i))
        .collect()
}

/// Gradient of [`mean_hitting_time`] with respect to the entries of `P`:
/// `(E a)(E b)^T` with `M^T a = pi`, `M b = delta`.
///
/// Treats all `m x m` entries of `P` as free; mapping to edge weights uses
/// `dP(j,k)/dw(j,k) = 1/pi(j)`.
pub fn hitting_time_gradient(chain: &ReversibleChainParam, goal: usize) -> Result<DMatrix<f64>> {
    check_goal(chain, goal)?;
    let m = chain.node_count();
    if m == 1 {
        return Ok(DMatrix::zeros(1, 1));
    }
    if !goal_reachable_from_all(chain, goal) {
        return Err(Error::Unreachable { goal });
    }
    let p = chain.transition_matrix();
    let system = restricted_system(&p, goal);
    let delta = non_goal_indicator(m, goal);
    let pi = DVector::from_column_slice(chain.pi().as_slice());
    let lu = system.clone().lu();
    let b = lu.solve(&delta).ok_or(Error::Unreachable { goal })?;
    let a = system
        .transpose()
        .lu()
        .solve(&pi)
        .ok_or(Error::Unreachable { goal })?;
    let ea = a.component_mul(&delta);
    let eb = b.component_mul(&delta);
    Ok(&ea * eb.transpose())
}

/// Simulated hitting time: mean and standard error over `n_traj` trajectories
/// started from `pi`. Deterministic in `seed`.
pub fn monte_carlo_hitting(
    chain: &ReversibleChainParam,
    goal: usize,
    n_traj: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_goal(chain, goal)?;
    if n_traj == 0 {
        return Err(Error::InvalidArgument("n_traj must be positive".into()));
    }
    let p = chain.transition_matrix();
    let m = chain.node_count();
    let rows: Vec<WeightedIndex<f64>> = (0..m)
        .map(|j| {
            WeightedIndex::new(p.row(j).iter().copied())
                .map_err(|e| Error::InvalidChain(format!("row {j}: {e}")))
        })
        .collect::<Result<_>>()?;
    let start = WeightedIndex::new(chain.pi().as_slice().iter().copied())
        .map_err(|e| Error::InvalidChain(format!("pi: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_traj {
        let mut state = start.sample(&mut rng);
        let mut steps = 0usize;
        while state != goal {
            if steps == TRAJECTORY_CAP {
                return Err(Error::TrajectoryCap {
                    goal,
                    cap: TRAJECTORY_CAP,
                });
            }
            state = rows[state].sample(&mut rng);
            steps += 1;
        }
        let s = steps as f64;
        sum += s;
        sum_sq += s * s;
    }
    let n = n_traj as f64;
    let mean = sum / n;
    let stderr = if n_traj > 1 {
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok((mean, stderr))
}
