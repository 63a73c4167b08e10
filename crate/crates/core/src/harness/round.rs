//! Barrier-synchronized execution of one negotiation round.

use rayon::prelude::*;

use crate::error::ProtocolError;
use crate::harness::bus::MessageBus;
use crate::rci::{agent_round, LocalState, Net, TradeMessage, TuningSchedule};

/// How the per-agent computations of a round are scheduled. Both modes
/// produce bit-identical results: each agent's round is a pure function of
/// the previous round's messages, and delivery happens only at the
/// barrier, in agent order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Serial,
    Parallel,
}

/// Runs round `k` for every agent against the mailboxes filled at the end
/// of round `k - 1`, then delivers all outboxes atomically at the barrier.
/// Returns the next per-agent states.
pub fn run_round(
    net: &Net,
    bus: &mut MessageBus,
    states: &[LocalState],
    k: u64,
    tuning: &TuningSchedule,
    mode: ExecMode,
) -> Result<Vec<LocalState>, ProtocolError> {
    let compute =
        |ctx: &crate::rci::AgentContext| -> Result<(LocalState, Vec<TradeMessage>), ProtocolError> {
            let mut inbox: Vec<TradeMessage> = Vec::with_capacity(ctx.neighbors.len());
            for (j, &m) in ctx.neighbors.iter().enumerate() {
                let edge_in = net.reverse_edge(ctx.edge_base + j);
                let msg = bus.read(edge_in).ok_or(ProtocolError::MissingMessage {
                    from: m.to_string(),
                    to: ctx.index.to_string(),
                    round: k,
                })?;
                inbox.push(msg);
            }
            agent_round(ctx, &states[ctx.index], &inbox, k, tuning)
        };

    let results: Vec<(LocalState, Vec<TradeMessage>)> = match mode {
        ExecMode::Serial => net.agents().iter().map(compute).collect::<Result<_, _>>()?,
        ExecMode::Parallel => net
            .agents()
            .par_iter()
            .map(compute)
            .collect::<Result<_, _>>()?,
    };

    bus.begin_round();
    let mut next = Vec::with_capacity(results.len());
    for (index, (state, outbox)) in results.into_iter().enumerate() {
        let edge_base = net.agent(index).edge_base;
        for (j, msg) in outbox.into_iter().enumerate() {
            bus.deliver(edge_base + j, msg)?;
        }
        next.push(state);
    }
    Ok(next)
}
