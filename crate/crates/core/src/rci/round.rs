//! The compiled negotiation network and the per-agent round function.

use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::market::{AgentId, AgentSpec, MarketInstance, TradeMatrix};
use crate::rci::schedule::TuningSchedule;
use crate::rci::state::LocalState;
use crate::rci::updates::{
    distribution_factors, lambda_update, mu_update, p_update, target_setpoint,
};

/// The only data that crosses an agent boundary: the sender's current
/// trade and price estimate for one directed edge. `sender`/`receiver`
/// are slots in the instance's agent list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeMessage {
    pub sender: usize,
    pub receiver: usize,
    /// Traded quantity `P_nm`, kWh per step.
    #[serde(rename = "P")]
    pub power: f64,
    /// Price estimate `lambda_nm`, c€/kWh.
    pub lambda: f64,
}

/// Wire-schema field names of the message payload. The audit log checks
/// that nothing beyond these ever crosses an agent boundary.
pub const PAYLOAD_FIELDS: [&str; 2] = ["P", "lambda"];

/// What one agent knows when it runs a round: its own parameters, its
/// ordered neighbor slots and the trading coefficient toward each.
/// Nothing about any neighbor's costs, bounds or preferences is in here.
#[derive(Debug, Clone)]
pub struct AgentContext {
    pub index: usize,
    pub spec: AgentSpec,
    pub neighbors: Vec<usize>,
    /// `c_nm` aligned with `neighbors`.
    pub coefficients: Vec<f64>,
    /// Directed edge id of the first neighbor; edge ids of the rest follow
    /// contiguously in neighbor order.
    pub edge_base: usize,
}

/// The compiled topology of one negotiation: per-agent contexts plus the
/// directed edge table and its reversal.
#[derive(Debug, Clone)]
pub struct Net {
    agents: Vec<AgentContext>,
    /// Directed edges as (sender, receiver) slots, grouped by sender.
    edges: Vec<(usize, usize)>,
    reverse: Vec<usize>,
}

impl Net {
    pub fn compile(instance: &MarketInstance) -> Net {
        let ids: Vec<&AgentId> = instance.agents().iter().map(|a| &a.id).collect();
        let slot_of = |id: &AgentId| ids.iter().position(|x| *x == id).unwrap();

        let mut agents = Vec::with_capacity(instance.agents().len());
        let mut edges = Vec::new();
        for (index, spec) in instance.agents().iter().enumerate() {
            let neighbor_ids = instance.graph().neighbors(&spec.id);
            let edge_base = edges.len();
            let mut neighbors = Vec::with_capacity(neighbor_ids.len());
            let mut coefficients = Vec::with_capacity(neighbor_ids.len());
            for m in neighbor_ids {
                neighbors.push(slot_of(m));
                coefficients.push(instance.coefficient(&spec.id, m));
                edges.push((index, slot_of(m)));
            }
            agents.push(AgentContext {
                index,
                spec: spec.clone(),
                neighbors,
                coefficients,
                edge_base,
            });
        }

        let reverse = edges
            .iter()
            .map(|&(n, m)| {
                let ctx = &agents[m];
                let j = ctx.neighbors.iter().position(|&x| x == n).unwrap();
                ctx.edge_base + j
            })
            .collect();

        Net {
            agents,
            edges,
            reverse,
        }
    }

    pub fn agents(&self) -> &[AgentContext] {
        &self.agents
    }

    pub fn agent(&self, index: usize) -> &AgentContext {
        &self.agents[index]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    /// Directed edge id of the opposite direction.
    pub fn reverse_edge(&self, id: usize) -> usize {
        self.reverse[id]
    }

    /// Cold states sized to each agent's neighborhood.
    pub fn cold_states(&self) -> Vec<LocalState> {
        self.agents
            .iter()
            .map(|ctx| LocalState::cold(ctx.neighbors.len()))
            .collect()
    }

    /// Assembles a trade matrix from per-agent states.
    pub fn trades_of(&self, instance: &MarketInstance, states: &[LocalState]) -> TradeMatrix {
        let mut trades = TradeMatrix::new();
        for ctx in &self.agents {
            for (j, &m) in ctx.neighbors.iter().enumerate() {
                trades.set(
                    ctx.spec.id.clone(),
                    instance.agents()[m].id.clone(),
                    states[ctx.index].trades[j],
                );
            }
        }
        trades
    }
}

/// One synchronous round of a single agent: the price update for every
/// neighbor, the multiplier update on the pre-round net injection, the
/// projected trade update toward the perceived-price targets, and the
/// outgoing message per neighbor. Deterministic in its inputs.
///
/// `inbox` must hold the message of every neighbor in neighbor order.
pub fn agent_round(
    ctx: &AgentContext,
    state: &LocalState,
    inbox: &[TradeMessage],
    k: u64,
    tuning: &TuningSchedule,
) -> Result<(LocalState, Vec<TradeMessage>), ProtocolError> {
    let alpha = tuning.alpha.value(k);
    let beta = tuning.beta.value(k);
    let eta = tuning.eta.value(k);
    let delta = tuning.delta.value(k);

    let mut next = state.clone();
    next.k = k;

    for (j, &m) in ctx.neighbors.iter().enumerate() {
        let msg = inbox.get(j).copied().filter(|msg| msg.sender == m);
        let msg = msg.ok_or_else(|| ProtocolError::MissingMessage {
            from: m.to_string(),
            to: ctx.index.to_string(),
            round: k,
        })?;
        next.prices[j] = lambda_update(
            state.prices[j],
            msg.lambda,
            state.trades[j],
            msg.power,
            alpha,
            beta,
        );
    }

    let p_n = state.net_injection();
    let (mu_up, mu_down) = mu_update(
        state.mu_up,
        state.mu_down,
        p_n,
        ctx.spec.p_min,
        ctx.spec.p_max,
        eta,
    );
    next.mu_up = mu_up;
    next.mu_down = mu_down;

    let factors = distribution_factors(&state.trades, delta)
        .expect("validated instances have no isolated agents");
    for (j, &f_nm) in factors.iter().enumerate() {
        let lambda_hat = next.prices[j] - ctx.coefficients[j];
        let target = target_setpoint(&ctx.spec, lambda_hat, mu_up, mu_down);
        next.trades[j] = p_update(ctx.spec.role, state.trades[j], f_nm, target, p_n);
    }

    let outbox = ctx
        .neighbors
        .iter()
        .enumerate()
        .map(|(j, &m)| TradeMessage {
            sender: ctx.index,
            receiver: m,
            power: next.trades[j],
            lambda: next.prices[j],
        })
        .collect();

    Ok((next, outbox))
}

/// Messages carrying an agent's current state, used to seed round 1.
pub(crate) fn initial_messages(ctx: &AgentContext, state: &LocalState) -> Vec<TradeMessage> {
    ctx.neighbors
        .iter()
        .enumerate()
        .map(|(j, &m)| TradeMessage {
            sender: ctx.index,
            receiver: m,
            power: state.trades[j],
            lambda: state.prices[j],
        })
        .collect()
}
