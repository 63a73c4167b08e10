//! Simulation harness: the audited synchronous message bus, the round
//! driver, the multi-timestep simulation and the case-study metrics.

mod bus;
mod metrics;
mod round;
mod timeseries;

pub use bus::{AuditLog, MessageBus};
pub use metrics::{criterion_sweep, interbus_metrics, SweepRow};
pub use round::{run_round, ExecMode};
pub use timeseries::{run_timeseries, Scenario, SimulationReport, StepReport};
