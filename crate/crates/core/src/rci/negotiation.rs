//! The negotiation orchestrator: drives synchronous rounds through the
//! message bus until the stopping criteria are met.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::harness::{run_round, ExecMode, MessageBus};
use crate::market::{agent_cost, AgentId, MarketInstance, TradeMatrix};
use crate::rci::round::{initial_messages, Net};
use crate::rci::schedule::{StoppingCriteria, TuningSchedule};
use crate::rci::state::LocalState;
use crate::rci::updates::distribution_factors;

/// One per-iteration trace record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: u64,
    /// Max price disagreement `|lambda_nm - lambda_mn|` over pairs.
    pub consensus_error: f64,
    /// Max reciprocity gap `|P_nm + P_mn|` over pairs.
    pub reciprocity_error: f64,
    /// Dispatch objective of the current iterate.
    pub objective: f64,
}

/// Outcome of one negotiation. `converged == false` means the iteration
/// cap was reached; the partial state is still returned so callers can
/// decide what to do with it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClearingResult {
    pub trades: TradeMatrix,
    /// Trading prices `lambda_nm` per directed edge.
    pub prices: BTreeMap<(AgentId, AgentId), f64>,
    /// Perceived prices `lambda_nm - c_nm` per directed edge.
    pub perceived_prices: BTreeMap<(AgentId, AgentId), f64>,
    pub mu_up: BTreeMap<AgentId, f64>,
    pub mu_down: BTreeMap<AgentId, f64>,
    /// Per-agent average of perceived prices weighted by the distribution
    /// factors; at convergence it equals the agent's marginal cost.
    pub avg_perceived_price: BTreeMap<AgentId, f64>,
    pub iterations: u64,
    pub converged: bool,
    pub objective: f64,
    pub trace: Vec<TraceRecord>,
    /// Final per-agent states, reusable as a warm start.
    pub final_states: Vec<LocalState>,
}

/// Knobs of one negotiation run that are not part of the market data.
#[derive(Debug, Clone, Copy, Default)]
pub struct NegotiationOptions {
    pub exec: ExecMode,
    /// Record a [`TraceRecord`] per iteration. Off by default: long
    /// horizons at the iteration cap would hold millions of records.
    pub record_trace: bool,
}

/// True when two consecutive iterates are within the stopping thresholds:
/// every price change below `eps_lambda`, every trade change below
/// `eps_p`, and (optionally) every multiplier change below `eps_mu`.
pub fn check_convergence(
    prev: &[LocalState],
    next: &[LocalState],
    criteria: &StoppingCriteria,
) -> bool {
    let mut d_lambda: f64 = 0.0;
    let mut d_p: f64 = 0.0;
    let mut d_mu: f64 = 0.0;
    for (a, b) in prev.iter().zip(next) {
        for (x, y) in a.prices.iter().zip(&b.prices) {
            d_lambda = d_lambda.max((x - y).abs());
        }
        for (x, y) in a.trades.iter().zip(&b.trades) {
            d_p = d_p.max((x - y).abs());
        }
        d_mu = d_mu
            .max((a.mu_up - b.mu_up).abs())
            .max((a.mu_down - b.mu_down).abs());
    }
    d_lambda < criteria.eps_lambda
        && d_p < criteria.eps_p
        && (!criteria.check_mu || d_mu < criteria.eps_mu)
}

/// Clears one market instance by iterating synchronous rounds over the
/// bus until convergence or the iteration cap.
///
/// `init` warm-starts the per-agent states (persistence across timesteps);
/// `None` is the cold start (all zeros). The run is deterministic given
/// its inputs, in both serial and parallel execution.
pub fn run_negotiation(
    instance: &MarketInstance,
    init: Option<Vec<LocalState>>,
    tuning: &TuningSchedule,
    criteria: &StoppingCriteria,
    bus: &mut MessageBus,
    options: NegotiationOptions,
) -> Result<ClearingResult, ProtocolError> {
    criteria.validate();
    let net = Net::compile(instance);
    assert_eq!(
        bus.edge_count(),
        net.edge_count(),
        "bus sized for a different trade graph"
    );

    let mut states = match init {
        Some(states) => {
            assert_eq!(
                states.len(),
                net.agents().len(),
                "warm start shape mismatch"
            );
            for (ctx, state) in net.agents().iter().zip(&states) {
                assert!(
                    state.is_consistent(ctx.spec.role, ctx.neighbors.len()),
                    "warm start state for {} violates invariants",
                    ctx.spec.id
                );
            }
            states
        }
        None => net.cold_states(),
    };

    // Round 1 consumes the initial states as "end of round 0" messages.
    bus.begin_round();
    for ctx in net.agents() {
        for (j, msg) in initial_messages(ctx, &states[ctx.index])
            .into_iter()
            .enumerate()
        {
            bus.deliver(ctx.edge_base + j, msg)?;
        }
    }

    let mut trace = Vec::new();
    let mut converged = false;
    let mut k = 0;
    while k < criteria.max_iterations {
        k += 1;
        let next = run_round(&net, bus, &states, k, tuning, options.exec)?;
        if options.record_trace {
            trace.push(trace_record(&net, &next, k));
        }
        converged = check_convergence(&states, &next, criteria);
        states = next;
        if converged {
            break;
        }
    }

    Ok(assemble_result(
        instance, &net, states, k, converged, trace, tuning,
    ))
}

fn trace_record(net: &Net, states: &[LocalState], k: u64) -> TraceRecord {
    let mut consensus: f64 = 0.0;
    let mut reciprocity: f64 = 0.0;
    let mut objective = 0.0;
    for ctx in net.agents() {
        let state = &states[ctx.index];
        objective += agent_cost(&ctx.spec, state.net_injection());
        for (j, c_nm) in ctx.coefficients.iter().enumerate() {
            objective += c_nm * state.trades[j];
            let e = ctx.edge_base + j;
            let rev = net.reverse_edge(e);
            if e < rev {
                let (m, jm) = edge_slot(net, rev);
                let partner = &states[m];
                consensus = consensus.max((state.prices[j] - partner.prices[jm]).abs());
                reciprocity = reciprocity.max((state.trades[j] + partner.trades[jm]).abs());
            }
        }
    }
    TraceRecord {
        iteration: k,
        consensus_error: consensus,
        reciprocity_error: reciprocity,
        objective,
    }
}

fn edge_slot(net: &Net, edge: usize) -> (usize, usize) {
    let (owner, _) = net.edge(edge);
    (owner, edge - net.agent(owner).edge_base)
}

fn assemble_result(
    instance: &MarketInstance,
    net: &Net,
    states: Vec<LocalState>,
    iterations: u64,
    converged: bool,
    trace: Vec<TraceRecord>,
    tuning: &TuningSchedule,
) -> ClearingResult {
    let trades = net.trades_of(instance, &states);
    let mut prices = BTreeMap::new();
    let mut perceived = BTreeMap::new();
    let mut mu_up = BTreeMap::new();
    let mut mu_down = BTreeMap::new();
    let mut avg_perceived = BTreeMap::new();

    let delta = tuning.delta.value(iterations.max(1));
    for ctx in net.agents() {
        let state = &states[ctx.index];
        mu_up.insert(ctx.spec.id.clone(), state.mu_up);
        mu_down.insert(ctx.spec.id.clone(), state.mu_down);
        let factors = distribution_factors(&state.trades, delta)
            .expect("validated instances have no isolated agents");
        let mut weighted = 0.0;
        for (j, &m) in ctx.neighbors.iter().enumerate() {
            let key = (ctx.spec.id.clone(), instance.agents()[m].id.clone());
            let lambda_hat = state.prices[j] - ctx.coefficients[j];
            prices.insert(key.clone(), state.prices[j]);
            perceived.insert(key, lambda_hat);
            weighted += factors[j] * lambda_hat;
        }
        avg_perceived.insert(ctx.spec.id.clone(), weighted);
    }

    let objective = crate::market::total_cost(instance, &trades);
    ClearingResult {
        trades,
        prices,
        perceived_prices: perceived,
        mu_up,
        mu_down,
        avg_perceived_price: avg_perceived,
        iterations,
        converged,
        objective,
        trace,
        final_states: states,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{distance_characteristics, AgentSpec, Role, TradeGraph};

    fn two_agent_instance(b_producer: f64, b_consumer: f64) -> MarketInstance {
        let p = AgentSpec {
            id: "gen".into(),
            role: Role::Producer,
            a: 0.1,
            b: b_producer,
            d: 0.0,
            p_min: 0.0,
            p_max: 20.0,
            position: (0.0, 0.0),
            bus: 1,
            criterion_values: BTreeMap::new(),
        };
        let mut c = p.clone();
        c.id = "load".into();
        c.role = Role::Consumer;
        c.b = b_consumer;
        c.p_min = -20.0;
        c.p_max = 0.0;
        let agents = vec![p, c];
        let chars = distance_characteristics(&agents, 1.0);
        let graph = TradeGraph::complete_producer_consumer(&agents);
        MarketInstance::new(agents, graph, chars).unwrap()
    }

    #[test]
    fn convergence_check_thresholds() {
        let criteria = StoppingCriteria::default();
        let a = vec![LocalState::cold(1)];
        assert!(check_convergence(&a, &a, &criteria));

        let mut b = a.clone();
        b[0].prices[0] = 0.01;
        assert!(!check_convergence(&a, &b, &criteria));

        let mut c = a.clone();
        c[0].prices[0] = 0.0005;
        c[0].trades[0] = 0.005;
        assert!(check_convergence(&a, &c, &criteria));
    }

    #[test]
    fn two_agent_case_reaches_analytic_optimum() {
        let instance = two_agent_instance(2.0, 4.0);
        let mut bus = MessageBus::new(2);
        let result = run_negotiation(
            &instance,
            None,
            &TuningSchedule::default(),
            &StoppingCriteria::default(),
            &mut bus,
            NegotiationOptions::default(),
        )
        .unwrap();
        assert!(
            result.converged,
            "no convergence in {} rounds",
            result.iterations
        );
        let p = result.trades.get(&"gen".into(), &"load".into());
        let lambda = result.prices[&("gen".into(), "load".into())];
        assert!((p - 10.0).abs() < 0.1, "P = {p}");
        assert!((lambda - 3.0).abs() < 0.01, "lambda = {lambda}");
        bus.audit().verify().unwrap();
    }

    #[test]
    fn unprofitable_market_clears_to_zero() {
        // Producer floor cost above the consumer's utility: the only
        // optimum is no trade, reached with binding sign constraints. The
        // residual trade scales with eps_lambda / alpha, so tighten the
        // stopping criteria to see the limit point.
        let instance = two_agent_instance(5.0, 2.0);
        let criteria = StoppingCriteria {
            eps_lambda: 1e-5,
            eps_p: 1e-4,
            eps_mu: 1e-6,
            ..StoppingCriteria::default()
        };
        let mut bus = MessageBus::new(2);
        let result = run_negotiation(
            &instance,
            None,
            &TuningSchedule::default(),
            &criteria,
            &mut bus,
            NegotiationOptions::default(),
        )
        .unwrap();
        assert!(result.converged);
        assert!(result.trades.get(&"gen".into(), &"load".into()).abs() < 0.01);
        assert!(result.trades.get(&"load".into(), &"gen".into()).abs() < 0.01);
    }

    #[test]
    fn warm_start_from_converged_state_is_fast() {
        let instance = two_agent_instance(2.0, 4.0);
        let tuning = TuningSchedule::default();
        let criteria = StoppingCriteria::default();
        let mut bus = MessageBus::new(2);
        let cold = run_negotiation(
            &instance,
            None,
            &tuning,
            &criteria,
            &mut bus,
            NegotiationOptions::default(),
        )
        .unwrap();
        assert!(cold.converged);

        let warm = run_negotiation(
            &instance,
            Some(cold.final_states.clone()),
            &tuning,
            &criteria,
            &mut bus,
            NegotiationOptions::default(),
        )
        .unwrap();
        assert!(warm.converged);
        assert!(
            warm.iterations * 10 <= cold.iterations,
            "warm {} vs cold {}",
            warm.iterations,
            cold.iterations
        );
    }

    #[test]
    fn trace_errors_shrink_toward_convergence() {
        let instance = two_agent_instance(2.0, 4.0);
        let mut bus = MessageBus::new(2);
        let result = run_negotiation(
            &instance,
            None,
            &TuningSchedule::default(),
            &StoppingCriteria::default(),
            &mut bus,
            NegotiationOptions {
                record_trace: true,
                ..Default::default()
            },
        )
        .unwrap();
        let trace = &result.trace;
        assert_eq!(trace.len() as u64, result.iterations);
        let last = trace.last().unwrap();
        assert!(last.consensus_error < 0.01);
        assert!(last.reciprocity_error < 0.1);
        assert!((last.objective - result.objective).abs() < 1e-9);
    }

    #[test]
    fn must_take_agent_is_driven_to_its_bound() {
        // A must-take producer pinned at 12 kWh against a flexible
        // consumer: multipliers must push the net injection to the bound.
        let mut instance = two_agent_instance(3.0, 8.0);
        let overrides = BTreeMap::from([(AgentId::from("gen"), (12.0, 12.0))]);
        instance = instance.with_bounds(&overrides).unwrap();
        let mut bus = MessageBus::new(2);
        let result = run_negotiation(
            &instance,
            None,
            &TuningSchedule::default(),
            &StoppingCriteria::default(),
            &mut bus,
            NegotiationOptions::default(),
        )
        .unwrap();
        assert!(result.converged);
        let p_n = result.trades.net_injection(&"gen".into());
        assert!((p_n - 12.0).abs() < 0.2, "net injection {p_n}");

        // The consumer values energy at 8 - 0.05 * 12 = 7.4 at the bound
        // while the unconstrained producer would inject 44, so the upper
        // multiplier must carry the scarcity rent (about 3.2) and the
        // lower one must stay near zero.
        let mu_up = result.mu_up[&AgentId::from("gen")];
        let mu_down = result.mu_down[&AgentId::from("gen")];
        assert!(mu_up > 1.0, "mu_up {mu_up}");
        assert!(mu_down < 0.1, "mu_down {mu_down}");
    }
}
