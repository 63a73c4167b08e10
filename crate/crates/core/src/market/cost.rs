//! Cost functions and product-differentiation coefficients.

use crate::error::ValidationError;
use crate::market::agent::AgentId;
use crate::market::agent::AgentSpec;
use crate::market::characteristics::TradeCharacteristics;
use crate::market::instance::MarketInstance;
use crate::market::trades::TradeMatrix;

/// Bilateral trading coefficient `c_nm`: the agent's criterion values
/// weighted by the characteristics of the edge, summed over criteria.
///
/// Fails if the agent values a criterion for which the edge carries no
/// characteristic.
pub fn trading_coefficient(
    agent: &AgentSpec,
    edge: (&AgentId, &AgentId),
    chars: &TradeCharacteristics,
) -> Result<f64, ValidationError> {
    let mut c = 0.0;
    for (criterion, value) in &agent.criterion_values {
        let gamma = chars.get(criterion, edge.0, edge.1).ok_or_else(|| {
            ValidationError::MissingCharacteristic {
                criterion: criterion.clone(),
                from: edge.0 .0.clone(),
                to: edge.1 .0.clone(),
            }
        })?;
        c += value * gamma;
    }
    Ok(c)
}

/// Production cost (or negative consumption utility) at net injection `p`:
/// `0.5 * a * p^2 + b * p + d`.
pub fn agent_cost(agent: &AgentSpec, p: f64) -> f64 {
    0.5 * agent.a * p * p + agent.b * p + agent.d
}

/// Gradient of [`agent_cost`]: `a * p + b`.
pub fn marginal_cost(agent: &AgentSpec, p: f64) -> f64 {
    agent.a * p + agent.b
}

/// Bilateral trading cost of one agent: the dot product of its trades with
/// its trading coefficients.
pub fn trading_cost(
    agent: &AgentSpec,
    trades: &TradeMatrix,
    neighbors: &[AgentId],
    chars: &TradeCharacteristics,
) -> Result<f64, ValidationError> {
    let mut cost = 0.0;
    for m in neighbors {
        let c_nm = trading_coefficient(agent, (&agent.id, m), chars)?;
        cost += c_nm * trades.get(&agent.id, m);
    }
    Ok(cost)
}

/// Total system cost: production costs plus bilateral trading costs over
/// all agents. This is the dispatch objective.
pub fn total_cost(instance: &MarketInstance, trades: &TradeMatrix) -> f64 {
    instance
        .agents()
        .iter()
        .map(|agent| {
            let p_n = trades.net_injection(&agent.id);
            let trading: f64 = instance
                .graph()
                .neighbors(&agent.id)
                .iter()
                .map(|m| instance.coefficient(&agent.id, m) * trades.get(&agent.id, m))
                .sum();
            agent_cost(agent, p_n) + trading
        })
        .sum()
}

/// Production/consumption cost alone, excluding bilateral trading costs.
pub fn direct_cost(instance: &MarketInstance, trades: &TradeMatrix) -> f64 {
    instance
        .agents()
        .iter()
        .map(|agent| agent_cost(agent, trades.net_injection(&agent.id)))
        .sum()
}

/// Price net of the agent's trading coefficient. In a tax reading of
/// product differentiation this is the price after tax.
pub fn perceived_price(lambda: f64, c_nm: f64) -> f64 {
    lambda - c_nm
}
