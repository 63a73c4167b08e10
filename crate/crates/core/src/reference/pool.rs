//! Pool-model oracle: single clearing price by bisection, plus the
//! construction that turns a balanced pool dispatch into a feasible set of
//! bilateral trades.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::market::{AgentId, AgentSpec, MarketInstance, TradeMatrix};

/// A pool equilibrium: one price, one net injection per agent, balanced to
/// the bisection tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSolution {
    pub price: f64,
    pub injections: BTreeMap<AgentId, f64>,
}

impl PoolSolution {
    pub fn imbalance(&self) -> f64 {
        self.injections.values().sum()
    }
}

/// Clamped marginal response of one agent to a price.
fn response(agent: &AgentSpec, price: f64) -> f64 {
    ((price - agent.b) / agent.a).clamp(agent.p_min, agent.p_max)
}

/// Clears the pool model (all trading coefficients zero, one global
/// balance constraint) by bisecting the price over the monotone aggregate
/// response `sum_n clamp((price - b_n)/a_n, bounds)` until the imbalance
/// is within `tol`.
pub fn pool_price_bisection(agents: &[AgentSpec], tol: f64) -> Result<PoolSolution, SolveError> {
    assert!(tol > 0.0);
    if agents.is_empty() {
        return Err(SolveError::Infeasible("no agents".into()));
    }
    let aggregate = |price: f64| -> f64 { agents.iter().map(|a| response(a, price)).sum() };

    // Bracket wide enough that every response is clamped at both ends.
    let lo_start = agents.iter().map(|a| a.b).fold(f64::INFINITY, f64::min) - 1.0;
    let hi_start = agents
        .iter()
        .map(|a| a.b + a.a * a.p_min.abs().max(a.p_max.abs()))
        .fold(f64::NEG_INFINITY, f64::max)
        + 1.0;

    let (mut lo, mut hi) = (lo_start, hi_start);
    if aggregate(lo) > tol {
        return Err(SolveError::Infeasible(format!(
            "excess supply {:.6} at price floor {:.3}",
            aggregate(lo),
            lo
        )));
    }
    if aggregate(hi) < -tol {
        return Err(SolveError::Infeasible(format!(
            "excess demand {:.6} at price cap {:.3}",
            aggregate(hi),
            hi
        )));
    }

    let mut price = 0.5 * (lo + hi);
    for _ in 0..200 {
        price = 0.5 * (lo + hi);
        let net = aggregate(price);
        if net.abs() <= tol && (hi - lo) <= tol.max(1e-12) {
            break;
        }
        if net > 0.0 {
            hi = price;
        } else {
            lo = price;
        }
    }

    let injections = agents
        .iter()
        .map(|a| (a.id.clone(), response(a, price)))
        .collect();
    let solution = PoolSolution { price, injections };
    if solution.imbalance().abs() > tol {
        return Err(SolveError::Infeasible(format!(
            "no balancing price in bracket: residual {:.3e}",
            solution.imbalance()
        )));
    }
    Ok(solution)
}

/// Spreads a balanced pool dispatch over the bilateral trade variables:
/// each producer serves every consumer in proportion to that consumer's
/// share of total consumption, and consumers mirror the trades. The
/// result satisfies reciprocity and the sign constraints exactly, with
/// row sums equal to the pool injections up to rounding.
pub fn pool_to_mbed(
    instance: &MarketInstance,
    pool: &PoolSolution,
) -> Result<TradeMatrix, SolveError> {
    let consumption: f64 = instance
        .consumers()
        .map(|c| pool.injections.get(&c.id).copied().unwrap_or(0.0))
        .sum();

    let mut trades = TradeMatrix::zeros(instance.graph());
    if consumption == 0.0 {
        let production: f64 = instance
            .producers()
            .map(|p| pool.injections.get(&p.id).copied().unwrap_or(0.0))
            .sum();
        // Zero-trade equilibria are valid; production dust below the
        // balance tolerance of the bisection is not "degenerate".
        if production.abs() > 1e-9 {
            return Err(SolveError::DegeneratePool);
        }
        return Ok(trades);
    }

    for producer in instance.producers() {
        let p_n = pool.injections.get(&producer.id).copied().unwrap_or(0.0);
        for consumer in instance.consumers() {
            let p_m = pool.injections.get(&consumer.id).copied().unwrap_or(0.0);
            let share = p_m / consumption;
            let trade = share * p_n;
            if !instance.graph().has_edge(&producer.id, &consumer.id) {
                if trade != 0.0 {
                    return Err(SolveError::Infeasible(format!(
                        "pool dispatch needs the missing edge {} -> {}",
                        producer.id, consumer.id
                    )));
                }
                continue;
            }
            trades.set(producer.id.clone(), consumer.id.clone(), trade);
            trades.set(consumer.id.clone(), producer.id.clone(), -trade);
        }
    }
    Ok(trades)
}
