//! Error types shared across the crate.

use thiserror::Error;

/// Construction-time violations of the market data model.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ValidationError {
    #[error("agent {0}: quadratic coefficient a must be > 0 (got {1})")]
    NonPositiveQuadratic(String, f64),
    #[error("agent {0}: coefficient {1} must be >= 0 (got {2})")]
    NegativeCoefficient(String, &'static str, f64),
    #[error("agent {0}: p_min {1} exceeds p_max {2}")]
    InvertedBounds(String, f64, f64),
    #[error("agent {0}: bounds [{1}, {2}] inconsistent with role {3}")]
    RoleSignMismatch(String, f64, f64, &'static str),
    #[error("agent {0}: non-finite parameter {1}")]
    NonFinite(String, &'static str),
    #[error("duplicate agent id {0}")]
    DuplicateAgent(String),
    #[error("graph references unknown agent {0}")]
    UnknownAgent(String),
    #[error("graph edge {0} -> {1} has no mirror edge")]
    AsymmetricEdge(String, String),
    #[error("graph contains self-edge at {0}")]
    SelfEdge(String),
    #[error("agent {0} has no trading partners")]
    IsolatedAgent(String),
    #[error("distribution factors need at least one neighbor")]
    EmptyNeighborhood,
    #[error("missing characteristic for criterion {criterion} on edge {from} -> {to}")]
    MissingCharacteristic {
        criterion: String,
        from: String,
        to: String,
    },
    #[error("characteristic for criterion {criterion} on edge {from} -> {to} must be finite and >= 0 (got {value})")]
    InvalidCharacteristic {
        criterion: String,
        from: String,
        to: String,
        value: f64,
    },
    #[error("trade matrix key {0} -> {1} is not an edge of the graph")]
    UnknownEdge(String, String),
    #[error("multiplier for agent {0} must be >= 0 (got {1})")]
    NegativeMultiplier(String, f64),
}

/// Violations of the round-based message protocol.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProtocolError {
    #[error("missing message from {from} to {to} for round {round}")]
    MissingMessage {
        from: String,
        to: String,
        round: u64,
    },
    #[error("duplicate message on edge {from} -> {to} within one round")]
    DuplicateMessage { from: String, to: String },
    #[error("message payload carried fields beyond {{P, lambda}}: {0:?}")]
    PayloadSchema(Vec<String>),
}

/// Failures of the centralized reference solvers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolveError {
    #[error("instance is infeasible: {0}")]
    Infeasible(String),
    #[error("solver stalled after {iterations} iterations (primal {primal:.3e}, dual {dual:.3e})")]
    MaxIterations {
        iterations: u64,
        primal: f64,
        dual: f64,
    },
    #[error("degenerate pool solution: zero total consumption with nonzero production")]
    DegeneratePool,
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// Failures of the simulation harness and its metrics.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum HarnessError {
    #[error("inter-bus metrics need exactly two buses, scenario has {0}")]
    UnsupportedBusCount(usize),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// Failures while loading, validating or saving scenario files.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("unsupported schema version {0} (expected 1)")]
    UnsupportedVersion(u32),
    #[error("timestep {step}: override references unknown agent {agent}")]
    UnknownOverrideAgent { step: usize, agent: String },
    #[error("timestep {step}, agent {agent}: {source}")]
    InvalidOverride {
        step: usize,
        agent: String,
        #[source]
        source: ValidationError,
    },
    #[error("series file row {row}: {message}")]
    SeriesRow { row: usize, message: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}
