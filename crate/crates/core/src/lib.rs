//! Discrete distributionally robust optimal control (DDROC) over density-ratio
//! ambiguity sets.
//!
//! The worst-case expectation `max_{p : p(i)/q0(i) <= 1+d} E_p[f]` is replaced by
//! the smooth Lagrange dual
//!
//! ```text
//! inf_{lambda >= 0, nu}  sum_i q0(i) * ((1+d) lambda_i exp((f_i - lambda_i - nu)/lambda_i) + nu)
//! ```
//!
//! which turns the min-max problem into a single smooth convex program. The crate
//! provides the ambiguity-set predicates ([`probspace`]), exact and dual oracles for
//! the inner problem ([`worstcase`]), a projected-gradient solver over polytopes
//! ([`convexsolve`]), the patrol-chain application built on mean hitting times
//! ([`patrol`], [`graphgen`]) and the experiment harness behind the `ddroc` binary
//! ([`cli`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod convexsolve;
pub mod error;
pub mod graphgen;
pub mod patrol;
pub mod probspace;
pub mod worstcase;

pub use error::{Error, Result};
pub use probspace::{AmbiguitySet, ProbabilityVector};
pub use worstcase::{CostTable, DualPoint, ExtendedReal};
