//! The trading scheme: who may negotiate with whom.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::market::agent::{AgentId, AgentSpec, Role};

/// Undirected trading graph stored as per-agent ordered neighbor sets.
///
/// "Neighbor" means a direct connection on the market communication graph,
/// not physical adjacency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeGraph {
    neighbors: BTreeMap<AgentId, Vec<AgentId>>,
}

impl TradeGraph {
    /// Builds a graph from explicit undirected edges.
    pub fn from_edges<I>(edges: I) -> Self
    where
        I: IntoIterator<Item = (AgentId, AgentId)>,
    {
        let mut sets: BTreeMap<AgentId, BTreeSet<AgentId>> = BTreeMap::new();
        for (a, b) in edges {
            sets.entry(a.clone()).or_default().insert(b.clone());
            sets.entry(b).or_default().insert(a);
        }
        TradeGraph {
            neighbors: sets
                .into_iter()
                .map(|(id, set)| (id, set.into_iter().collect()))
                .collect(),
        }
    }

    /// Builds the default trading scheme: every producer may trade with
    /// every consumer. Same-role edges are allowed by the model (reciprocity
    /// plus the sign constraints force those trades to zero) but creating
    /// them only inflates the negotiation state, so the builder skips them.
    pub fn complete_producer_consumer(agents: &[AgentSpec]) -> Self {
        let mut edges = Vec::new();
        for p in agents.iter().filter(|a| a.role == Role::Producer) {
            for c in agents.iter().filter(|a| a.role == Role::Consumer) {
                edges.push((p.id.clone(), c.id.clone()));
            }
        }
        TradeGraph::from_edges(edges)
    }

    /// Ordered neighbor set of one agent; empty if the agent is unknown.
    pub fn neighbors(&self, id: &AgentId) -> &[AgentId] {
        self.neighbors.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentId> {
        self.neighbors.keys()
    }

    pub fn has_edge(&self, from: &AgentId, to: &AgentId) -> bool {
        self.neighbors
            .get(from)
            .is_some_and(|ns| ns.binary_search(to).is_ok())
    }

    /// All directed edges in deterministic (owner, neighbor) order.
    pub fn directed_edges(&self) -> impl Iterator<Item = (&AgentId, &AgentId)> {
        self.neighbors
            .iter()
            .flat_map(|(n, ns)| ns.iter().map(move |m| (n, m)))
    }

    pub fn directed_edge_count(&self) -> usize {
        self.neighbors.values().map(Vec::len).sum()
    }

    /// Checks symmetry, absence of self-edges, and that every listed id is
    /// one of `known` with a nonempty neighborhood.
    pub fn validate(&self, known: &BTreeSet<AgentId>) -> Result<(), ValidationError> {
        for id in known {
            match self.neighbors.get(id) {
                None => return Err(ValidationError::IsolatedAgent(id.0.clone())),
                Some(ns) if ns.is_empty() => {
                    return Err(ValidationError::IsolatedAgent(id.0.clone()))
                }
                Some(_) => {}
            }
        }
        for (n, ns) in &self.neighbors {
            if !known.contains(n) {
                return Err(ValidationError::UnknownAgent(n.0.clone()));
            }
            for m in ns {
                if m == n {
                    return Err(ValidationError::SelfEdge(n.0.clone()));
                }
                if !known.contains(m) {
                    return Err(ValidationError::UnknownAgent(m.0.clone()));
                }
                if !self.has_edge(m, n) {
                    return Err(ValidationError::AsymmetricEdge(n.0.clone(), m.0.clone()));
                }
            }
        }
        Ok(())
    }
}
