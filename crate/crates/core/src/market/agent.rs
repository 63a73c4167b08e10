use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::market::characteristics::CriterionId;

/// Identifier of a market participant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId(s.to_owned())
    }
}

/// Market role. Producers only sell (all trades >= 0), consumers only buy
/// (all trades <= 0). Prosumers are out of scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Producer,
    Consumer,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Producer => "producer",
            Role::Consumer => "consumer",
        }
    }
}

/// Static description of one market participant.
///
/// The cost (or negative utility) of a power set-point `P` is the quadratic
/// `0.5 * a * P^2 + b * P + d`, in c€ with `P` in kWh per time step.
/// `criterion_values` holds the agent's unit valuation of each trade
/// criterion; positive values penalize, negative values reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: AgentId,
    pub role: Role,
    /// Quadratic cost coefficient, c€/kWh². Must be strictly positive: the
    /// negotiation inverts the cost gradient, which has to be bijective.
    pub a: f64,
    /// Linear cost coefficient, c€/kWh.
    pub b: f64,
    /// Constant cost offset, c€. Never affects the dispatch; kept for
    /// reporting.
    #[serde(default)]
    pub d: f64,
    /// Lower net-injection bound, kWh per step.
    pub p_min: f64,
    /// Upper net-injection bound, kWh per step.
    pub p_max: f64,
    /// Planar position in km, used to derive distance characteristics.
    pub position: (f64, f64),
    /// Bus label. A market construct only; there is no network model.
    pub bus: u32,
    /// Criterion id -> c_n^g, c€/kWh per characteristic unit.
    #[serde(default)]
    pub criterion_values: BTreeMap<CriterionId, f64>,
}

impl AgentSpec {
    /// Checks the per-agent invariants: positive-definite cost curvature,
    /// non-negative b and d, ordered bounds, and bounds on the correct side
    /// of zero for the role.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let name = || self.id.0.clone();
        for (label, v) in [
            ("a", self.a),
            ("b", self.b),
            ("d", self.d),
            ("p_min", self.p_min),
            ("p_max", self.p_max),
            ("position.x", self.position.0),
            ("position.y", self.position.1),
        ] {
            if !v.is_finite() {
                return Err(ValidationError::NonFinite(name(), label));
            }
        }
        if self.a <= 0.0 {
            return Err(ValidationError::NonPositiveQuadratic(name(), self.a));
        }
        if self.b < 0.0 {
            return Err(ValidationError::NegativeCoefficient(name(), "b", self.b));
        }
        if self.d < 0.0 {
            return Err(ValidationError::NegativeCoefficient(name(), "d", self.d));
        }
        if self.p_min > self.p_max {
            return Err(ValidationError::InvertedBounds(
                name(),
                self.p_min,
                self.p_max,
            ));
        }
        match self.role {
            Role::Producer if self.p_min < 0.0 => Err(ValidationError::RoleSignMismatch(
                name(),
                self.p_min,
                self.p_max,
                "producer",
            )),
            Role::Consumer if self.p_max > 0.0 => Err(ValidationError::RoleSignMismatch(
                name(),
                self.p_min,
                self.p_max,
                "consumer",
            )),
            _ => {
                for v in self.criterion_values.values() {
                    if !v.is_finite() {
                        return Err(ValidationError::NonFinite(name(), "criterion value"));
                    }
                }
                Ok(())
            }
        }
    }

    /// True when the bounds pin the net injection to a single value
    /// (renewables modelled as must-take generators).
    pub fn is_must_take(&self) -> bool {
        self.p_min == self.p_max
    }

    /// Replaces the injection bounds, revalidating the role sign rule.
    pub fn with_bounds(&self, p_min: f64, p_max: f64) -> Result<AgentSpec, ValidationError> {
        let mut spec = self.clone();
        spec.p_min = p_min;
        spec.p_max = p_max;
        spec.validate()?;
        Ok(spec)
    }
}
