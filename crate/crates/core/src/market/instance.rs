//! One clearing problem: agents, trade graph and trade characteristics.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::market::agent::{AgentId, AgentSpec, Role};
use crate::market::characteristics::TradeCharacteristics;
use crate::market::cost::trading_coefficient;
use crate::market::graph::TradeGraph;

/// A validated market instance.
///
/// Construction checks every agent invariant, graph symmetry, and that a
/// characteristic exists on every edge for every criterion referenced by
/// the edge's owner. Trading coefficients are precomputed per directed
/// edge so cost evaluation cannot fail afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketInstance {
    agents: Vec<AgentSpec>,
    graph: TradeGraph,
    characteristics: TradeCharacteristics,
    coefficients: BTreeMap<(AgentId, AgentId), f64>,
}

impl MarketInstance {
    pub fn new(
        agents: Vec<AgentSpec>,
        graph: TradeGraph,
        characteristics: TradeCharacteristics,
    ) -> Result<Self, ValidationError> {
        let mut known = BTreeSet::new();
        for agent in &agents {
            agent.validate()?;
            if !known.insert(agent.id.clone()) {
                return Err(ValidationError::DuplicateAgent(agent.id.0.clone()));
            }
        }
        graph.validate(&known)?;
        characteristics.validate()?;

        let by_id: BTreeMap<&AgentId, &AgentSpec> = agents.iter().map(|a| (&a.id, a)).collect();
        let mut coefficients = BTreeMap::new();
        for (n, m) in graph.directed_edges() {
            let owner = by_id[n];
            let c = trading_coefficient(owner, (n, m), &characteristics)?;
            coefficients.insert((n.clone(), m.clone()), c);
        }

        Ok(MarketInstance {
            agents,
            graph,
            characteristics,
            coefficients,
        })
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn graph(&self) -> &TradeGraph {
        &self.graph
    }

    pub fn characteristics(&self) -> &TradeCharacteristics {
        &self.characteristics
    }

    pub fn agent(&self, id: &AgentId) -> Option<&AgentSpec> {
        self.agents.iter().find(|a| &a.id == id)
    }

    pub fn index_of(&self, id: &AgentId) -> Option<usize> {
        self.agents.iter().position(|a| &a.id == id)
    }

    /// Precomputed trading coefficient `c_nm` of the directed edge.
    pub fn coefficient(&self, from: &AgentId, to: &AgentId) -> f64 {
        self.coefficients
            .get(&(from.clone(), to.clone()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn producers(&self) -> impl Iterator<Item = &AgentSpec> {
        self.agents.iter().filter(|a| a.role == Role::Producer)
    }

    pub fn consumers(&self) -> impl Iterator<Item = &AgentSpec> {
        self.agents.iter().filter(|a| a.role == Role::Consumer)
    }

    /// Distinct bus labels, ascending.
    pub fn buses(&self) -> Vec<u32> {
        let mut buses: Vec<u32> = self
            .agents
            .iter()
            .map(|a| a.bus)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        buses.sort_unstable();
        buses
    }

    /// A copy of the instance with some agents' bounds replaced,
    /// revalidating the role sign rules.
    pub fn with_bounds(
        &self,
        overrides: &BTreeMap<AgentId, (f64, f64)>,
    ) -> Result<MarketInstance, ValidationError> {
        let mut agents = self.agents.clone();
        for agent in &mut agents {
            if let Some((lo, hi)) = overrides.get(&agent.id) {
                *agent = agent.with_bounds(*lo, *hi)?;
            }
        }
        let mut instance = self.clone();
        instance.agents = agents;
        Ok(instance)
    }

    /// A copy of the instance with every agent's criterion values replaced
    /// by the common-magnitude rule: `+c` on producers, `-c` on consumers,
    /// applied to `criterion`.
    pub fn with_common_criterion(
        &self,
        criterion: &str,
        magnitude: f64,
    ) -> Result<MarketInstance, ValidationError> {
        let agents = self
            .agents
            .iter()
            .map(|a| {
                let mut agent = a.clone();
                let value = match a.role {
                    Role::Producer => magnitude,
                    Role::Consumer => -magnitude,
                };
                agent.criterion_values = BTreeMap::from([(criterion.to_string(), value)]);
                agent
            })
            .collect();
        MarketInstance::new(agents, self.graph.clone(), self.characteristics.clone())
    }
}
