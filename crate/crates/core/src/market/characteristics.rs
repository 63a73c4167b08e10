//! Trade characteristics: the objective per-trade attributes that product
//! differentiation prices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::market::agent::{AgentId, AgentSpec};

/// Identifier of a differentiation criterion (e.g. `"distance"`).
pub type CriterionId = String;

/// Per-directed-edge characteristic values, keyed by criterion.
///
/// Characteristics are stored from the perspective of the sending agent:
/// gamma for `n -> m` and for `m -> n` are distinct entries. The distance
/// builder emits symmetric values, but asymmetric inputs are accepted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TradeCharacteristics {
    gamma: BTreeMap<CriterionId, BTreeMap<(AgentId, AgentId), f64>>,
}

impl TradeCharacteristics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(
        &mut self,
        criterion: impl Into<CriterionId>,
        from: AgentId,
        to: AgentId,
        value: f64,
    ) {
        self.gamma
            .entry(criterion.into())
            .or_default()
            .insert((from, to), value);
    }

    pub fn get(&self, criterion: &str, from: &AgentId, to: &AgentId) -> Option<f64> {
        self.gamma
            .get(criterion)?
            .get(&(from.clone(), to.clone()))
            .copied()
    }

    pub fn criteria(&self) -> impl Iterator<Item = &CriterionId> {
        self.gamma.keys()
    }

    /// All values must be finite and non-negative.
    pub fn validate(&self) -> Result<(), ValidationError> {
        for (criterion, edges) in &self.gamma {
            for ((from, to), value) in edges {
                if !value.is_finite() || *value < 0.0 {
                    return Err(ValidationError::InvalidCharacteristic {
                        criterion: criterion.clone(),
                        from: from.0.clone(),
                        to: to.0.clone(),
                        value: *value,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Criterion id used by the distance-based differentiation of the bundled
/// case studies.
pub const DISTANCE_CRITERION: &str = "distance";

/// Builds the distance characteristic for every ordered pair of agents:
/// Euclidean distance within a bus, a fixed `inter_bus_gamma` between
/// buses. Symmetric per edge by construction.
pub fn distance_characteristics(
    agents: &[AgentSpec],
    inter_bus_gamma: f64,
) -> TradeCharacteristics {
    let mut chars = TradeCharacteristics::new();
    for n in agents {
        for m in agents {
            if n.id == m.id {
                continue;
            }
            let gamma = if n.bus == m.bus {
                let dx = n.position.0 - m.position.0;
                let dy = n.position.1 - m.position.1;
                (dx * dx + dy * dy).sqrt()
            } else {
                inter_bus_gamma
            };
            chars.set(DISTANCE_CRITERION, n.id.clone(), m.id.clone(), gamma);
        }
    }
    chars
}
