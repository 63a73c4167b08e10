//! First-order optimality residuals for candidate primal/dual points.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::market::agent::AgentId;
use crate::market::instance::MarketInstance;
use crate::market::trades::TradeMatrix;

/// Breakdown of the optimality residual of a candidate point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Max over non-zero trades of
    /// `|a_n P_n + b_n + c_nm - lambda_nm + mu_up_n - mu_down_n|`.
    pub stationarity: f64,
    /// Max of `|mu * (bound slack)|` over agents and both bounds.
    pub complementary_slackness: f64,
    /// Max price disagreement `|lambda_nm - lambda_mn|` over pairs.
    pub consensus: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.complementary_slackness)
            .max(self.consensus)
    }
}

/// Trades below this magnitude (kWh) do not carry a stationarity
/// condition: their sign constraint may be binding instead, and numerical
/// solvers leave dust of this order on inactive edges.
const ACTIVE_TRADE_TOL: f64 = 1e-6;

/// Evaluates the first-order optimality residuals of a candidate point
/// `(trades, prices, mu_up, mu_down)`.
///
/// Multipliers must be non-negative; a negative multiplier is a contract
/// violation, not a large residual.
pub fn kkt_residual(
    instance: &MarketInstance,
    trades: &TradeMatrix,
    prices: &BTreeMap<(AgentId, AgentId), f64>,
    mu_up: &BTreeMap<AgentId, f64>,
    mu_down: &BTreeMap<AgentId, f64>,
) -> Result<KktReport, ValidationError> {
    for (id, mu) in mu_up.iter().chain(mu_down.iter()) {
        if *mu < 0.0 {
            return Err(ValidationError::NegativeMultiplier(id.0.clone(), *mu));
        }
    }

    let mut report = KktReport::default();
    let lambda = |n: &AgentId, m: &AgentId| -> f64 {
        prices.get(&(n.clone(), m.clone())).copied().unwrap_or(0.0)
    };

    for agent in instance.agents() {
        let p_n = trades.net_injection(&agent.id);
        let up = mu_up.get(&agent.id).copied().unwrap_or(0.0);
        let down = mu_down.get(&agent.id).copied().unwrap_or(0.0);

        let slack_up = (up * (p_n - agent.p_max)).abs();
        let slack_down = (down * (agent.p_min - p_n)).abs();
        report.complementary_slackness =
            report.complementary_slackness.max(slack_up).max(slack_down);

        for m in instance.graph().neighbors(&agent.id) {
            let p_nm = trades.get(&agent.id, m);
            if p_nm.abs() > ACTIVE_TRADE_TOL {
                let c_nm = instance.coefficient(&agent.id, m);
                let residual = agent.a * p_n + agent.b + c_nm - lambda(&agent.id, m) + up - down;
                report.stationarity = report.stationarity.max(residual.abs());
            }
            if agent.id < *m {
                let gap = (lambda(&agent.id, m) - lambda(m, &agent.id)).abs();
                report.consensus = report.consensus.max(gap);
            }
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::agent::{AgentSpec, Role};
    use crate::market::characteristics::TradeCharacteristics;
    use crate::market::graph::TradeGraph;

    fn two_agent_instance() -> MarketInstance {
        let p = AgentSpec {
            id: "p".into(),
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
        let mut c = p.clone();
        c.id = "c".into();
        c.role = Role::Consumer;
        c.b = 4.0;
        c.p_min = -20.0;
        c.p_max = 0.0;
        let agents = vec![p, c];
        let graph = TradeGraph::complete_producer_consumer(&agents);
        MarketInstance::new(agents, graph, TradeCharacteristics::new()).unwrap()
    }

    fn analytic_point() -> (TradeMatrix, BTreeMap<(AgentId, AgentId), f64>) {
        let mut t = TradeMatrix::new();
        t.set("p".into(), "c".into(), 10.0);
        t.set("c".into(), "p".into(), -10.0);
        let mut prices = BTreeMap::new();
        prices.insert(("p".into(), "c".into()), 3.0);
        prices.insert(("c".into(), "p".into()), 3.0);
        (t, prices)
    }

    #[test]
    fn analytic_optimum_has_zero_residual() {
        let instance = two_agent_instance();
        let (t, prices) = analytic_point();
        let report =
            kkt_residual(&instance, &t, &prices, &BTreeMap::new(), &BTreeMap::new()).unwrap();
        assert!(report.max() < 1e-12, "residual {report:?}");
    }

    #[test]
    fn price_perturbation_shows_up_linearly() {
        let instance = two_agent_instance();
        let (t, mut prices) = analytic_point();
        *prices.get_mut(&("p".into(), "c".into())).unwrap() += 0.5;
        let report =
            kkt_residual(&instance, &t, &prices, &BTreeMap::new(), &BTreeMap::new()).unwrap();
        assert!((report.stationarity - 0.5).abs() < 1e-12);
        assert!((report.consensus - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_multiplier_is_contract_violation() {
        let instance = two_agent_instance();
        let (t, prices) = analytic_point();
        let mu_up: BTreeMap<AgentId, f64> = BTreeMap::from([(AgentId::from("p"), -0.1)]);
        assert!(matches!(
            kkt_residual(&instance, &t, &prices, &mu_up, &BTreeMap::new()),
            Err(ValidationError::NegativeMultiplier(_, _))
        ));
    }

    #[test]
    fn complementary_slackness_detects_inactive_bound_multiplier() {
        let instance = two_agent_instance();
        let (t, prices) = analytic_point();
        // mu_up on the producer while P_n = 10 < 20: slack 10, residual 1.0.
        let mu_up: BTreeMap<AgentId, f64> = BTreeMap::from([(AgentId::from("p"), 0.1)]);
        let report = kkt_residual(&instance, &t, &prices, &mu_up, &BTreeMap::new()).unwrap();
        assert!((report.complementary_slackness - 1.0).abs() < 1e-12);
    }
}
