//! Market data model: agents, trade graph, product-differentiation
//! coefficients, cost functions and the verification predicates shared by
//! the negotiation engine and the reference solver.
//!
//! All types are immutable value data after construction and safe to share
//! read-only across concurrently negotiating agents.

mod agent;
mod characteristics;
mod cost;
mod feasibility;
mod instance;
mod kkt;
mod trades;

pub mod graph;

pub use agent::{AgentId, AgentSpec, Role};
pub use characteristics::{
    distance_characteristics, CriterionId, TradeCharacteristics, DISTANCE_CRITERION,
};
pub use cost::{
    agent_cost, direct_cost, marginal_cost, perceived_price, total_cost, trading_coefficient,
    trading_cost,
};
pub use feasibility::{check_feasibility, FeasibilityReport, Violation};
pub use graph::TradeGraph;
pub use instance::MarketInstance;
pub use kkt::{kkt_residual, KktReport};
pub use trades::TradeMatrix;
