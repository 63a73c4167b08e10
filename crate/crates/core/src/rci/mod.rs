//! The decentralized negotiation engine.
//!
//! Each agent iterates three local updates — price consensus+innovation,
//! bound-multiplier ascent, and a projected gradient step on its trades —
//! exchanging only `{P, lambda}` messages with its trading partners
//! between rounds. Rounds are synchronous: every update consumes the
//! neighbor values received at the end of the previous round.

mod negotiation;
mod round;
mod schedule;
mod state;
mod updates;

pub use negotiation::{
    check_convergence, run_negotiation, ClearingResult, NegotiationOptions, TraceRecord,
};
pub use round::{agent_round, AgentContext, Net, TradeMessage, PAYLOAD_FIELDS};
pub use schedule::{PowerSequence, StoppingCriteria, TuningSchedule};
pub use state::LocalState;
pub use updates::{distribution_factors, lambda_update, mu_update, p_update, target_setpoint};
