//! Independent centralized solutions for verification: a dense ADMM
//! quadratic program over the reduced per-pair trade variables, and the
//! pool-model bisection oracle with its feasible-point construction.
//!
//! Nothing in here shares an iteration with the decentralized engine;
//! that independence is what makes the optimality-gap measurements
//! meaningful.

mod central;
mod pool;
mod qp;

pub use central::{
    gap_against_central, optimality_gap, solve_centralized, CentralSolution, DEFAULT_TOLERANCE,
};
pub use pool::{pool_price_bisection, pool_to_mbed, PoolSolution};
pub use qp::{QpProblem, QpSettings, QpSolution};
