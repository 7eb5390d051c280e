//! Patrol-agent design: reversible chains on a graph, their mean hitting times
//! and the nominal (SOC) and robust (DDROC) chain-design problems.

pub mod chain;
pub mod design;
pub mod graph;
pub mod hitting;

pub use chain::{chain_from_weights, ReversibleChainParam};
pub use design::{
    solve_patrol_ddroc, solve_patrol_ddroc_from, solve_patrol_soc, solve_patrol_soc_from,
    EdgeParameterization, PatrolSolution, RobustDetails,
};
pub use graph::Graph;
pub use hitting::{hitting_time_gradient, hitting_time_vector, mean_hitting_time, monte_carlo_hitting};
