//! Peer-to-peer electricity market clearing.
//!
//! Implements a multi-bilateral economic dispatch: every trade between a
//! producer and a consumer is a separate decision variable with its own
//! reciprocity constraint, and the shadow price of each reciprocity
//! constraint is the price of that trade. Product differentiation enters
//! through per-trade coefficients built from agent criterion values and
//! objective trade characteristics (e.g. the distance between partners),
//! so different trades may clear at different prices.
//!
//! The dispatch is solved two ways:
//!
//! * [`rci`] — a fully decentralized relaxed consensus+innovation
//!   negotiation in which agents exchange only `{P, λ}` messages with
//!   their trading partners and iterate price, bound-multiplier and
//!   quantity updates until the stopping criteria are met.
//! * [`reference`] — an independent centralized solver (dense ADMM on the
//!   reduced per-pair QP) plus a pool-model bisection oracle, used to
//!   measure optimality gaps and to cross-check feasibility constructions.
//!
//! [`harness`] provides the synchronous message bus with boundary
//! auditing and the multi-timestep simulation driver; [`scenario`]
//! provides scenario file I/O, synthetic bound series and the bundled
//! twelve-agent two-bus case.

pub mod error;
pub mod harness;
pub mod market;
pub mod rci;
pub mod reference;
pub mod scenario;

pub use error::{HarnessError, ProtocolError, ScenarioError, SolveError, ValidationError};
