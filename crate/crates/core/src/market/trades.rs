//! The dispatch decision variables: one traded quantity per directed edge.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::market::agent::AgentId;
use crate::market::graph::TradeGraph;

/// Bilateral trades `P_nm` (kWh per step) keyed by directed edge, positive
/// for sales and negative for purchases. The net injection of an agent is
/// the sum of its row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TradeMatrix {
    trades: BTreeMap<(AgentId, AgentId), f64>,
}

impl TradeMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// A zero trade for every directed edge of the graph.
    pub fn zeros(graph: &TradeGraph) -> Self {
        let trades = graph
            .directed_edges()
            .map(|(n, m)| ((n.clone(), m.clone()), 0.0))
            .collect();
        TradeMatrix { trades }
    }

    pub fn set(&mut self, from: AgentId, to: AgentId, value: f64) {
        self.trades.insert((from, to), value);
    }

    pub fn get(&self, from: &AgentId, to: &AgentId) -> f64 {
        self.trades
            .get(&(from.clone(), to.clone()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AgentId, &AgentId, f64)> {
        self.trades.iter().map(|((n, m), v)| (n, m, *v))
    }

    pub fn len(&self) -> usize {
        self.trades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trades.is_empty()
    }

    /// Net injection of one agent: the sum over its outgoing trades.
    pub fn net_injection(&self, agent: &AgentId) -> f64 {
        self.trades
            .range((agent.clone(), AgentId::new(""))..)
            .take_while(|((n, _), _)| n == agent)
            .map(|(_, v)| *v)
            .sum()
    }

    /// Whether the key set equals the directed edges of `graph`.
    pub fn matches_graph(&self, graph: &TradeGraph) -> bool {
        self.trades.len() == graph.directed_edge_count()
            && self.trades.keys().all(|(n, m)| graph.has_edge(n, m))
    }

    /// Projects onto the reciprocity subspace: each directed value is
    /// replaced by `(P_nm - P_mn) / 2`, making every pair exactly balanced.
    pub fn symmetrized(&self) -> TradeMatrix {
        let trades = self
            .trades
            .iter()
            .map(|((n, m), v)| {
                let mirror = self.get(m, n);
                ((n.clone(), m.clone()), (v - mirror) / 2.0)
            })
            .collect();
        TradeMatrix { trades }
    }
}

impl FromIterator<((AgentId, AgentId), f64)> for TradeMatrix {
    fn from_iter<T: IntoIterator<Item = ((AgentId, AgentId), f64)>>(iter: T) -> Self {
        TradeMatrix {
            trades: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn net_injection_sums_row() {
        let mut t = TradeMatrix::new();
        t.set("p".into(), "c1".into(), 3.0);
        t.set("p".into(), "c2".into(), 4.5);
        t.set("c1".into(), "p".into(), -3.0);
        assert_eq!(t.net_injection(&"p".into()), 7.5);
        assert_eq!(t.net_injection(&"c1".into()), -3.0);
        assert_eq!(t.net_injection(&"nobody".into()), 0.0);
    }

    #[test]
    fn symmetrization_balances_pairs() {
        let mut t = TradeMatrix::new();
        t.set("p".into(), "c".into(), 3.0);
        t.set("c".into(), "p".into(), -2.0);
        let s = t.symmetrized();
        assert_eq!(s.get(&"p".into(), &"c".into()), 2.5);
        assert_eq!(s.get(&"c".into(), &"p".into()), -2.5);
    }
}
