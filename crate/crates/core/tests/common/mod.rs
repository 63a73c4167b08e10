//! Shared fixtures for the integration suites.

use std::collections::BTreeMap;

use mbed_core::harness::MessageBus;
use mbed_core::market::{
    distance_characteristics, AgentId, AgentSpec, MarketInstance, Role, TradeGraph,
};
use mbed_core::rci::{
    run_negotiation, ClearingResult, NegotiationOptions, StoppingCriteria, TuningSchedule,
};

/// Producer a=0.1, b=2 on [0, 20] against consumer a=0.1, b=4 on [-20, 0]:
/// marginals meet at P = 10, lambda = 3, objective -10.
pub fn two_agent_instance() -> MarketInstance {
    let producer = AgentSpec {
        id: "gen".into(),
        role: Role::Producer,
        a: 0.1,
        b: 2.0,
        d: 0.0,
        p_min: 0.0,
        p_max: 20.0,
        position: (0.0, 0.0),
        bus: 1,
        criterion_values: BTreeMap::new(),
    };
    let mut consumer = producer.clone();
    consumer.id = "load".into();
    consumer.role = Role::Consumer;
    consumer.b = 4.0;
    consumer.p_min = -20.0;
    consumer.p_max = 0.0;
    let agents = vec![producer, consumer];
    let chars = distance_characteristics(&agents, 1.0);
    let graph = TradeGraph::complete_producer_consumer(&agents);
    MarketInstance::new(agents, graph, chars).unwrap()
}

/// Clears one instance cold with the given criteria, returning the result
/// and the bus for audit inspection.
pub fn clear(
    instance: &MarketInstance,
    tuning: &TuningSchedule,
    criteria: &StoppingCriteria,
) -> (ClearingResult, MessageBus) {
    let mut bus = MessageBus::new(instance.graph().directed_edge_count());
    let result = run_negotiation(
        instance,
        None,
        tuning,
        criteria,
        &mut bus,
        NegotiationOptions::default(),
    )
    .unwrap();
    (result, bus)
}

/// Largest per-agent spread of perceived prices over trades with
/// `|P| > 10 * eps_p`.
#[allow(dead_code)] // each suite uses a different subset of the helpers
pub fn max_perceived_spread(instance: &MarketInstance, result: &ClearingResult, eps_p: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for agent in instance.agents() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in instance.graph().neighbors(&agent.id) {
            if result.trades.get(&agent.id, m).abs() > 10.0 * eps_p {
                let hat = result.perceived_prices[&(agent.id.clone(), m.clone())];
                lo = lo.min(hat);
                hi = hi.max(hat);
            }
        }
        if hi > lo {
            worst = worst.max(hi - lo);
        }
    }
    worst
}

#[allow(dead_code)]
pub fn agent_id(s: &str) -> AgentId {
    AgentId::from(s)
}
