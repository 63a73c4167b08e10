//! Sequential clearing of a multi-timestep scenario with optional
//! persistence warm starts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::harness::bus::MessageBus;
use crate::market::{direct_cost, AgentId, MarketInstance, TradeMatrix};
use crate::rci::{
    run_negotiation, ClearingResult, NegotiationOptions, Net, StoppingCriteria, TraceRecord,
    TuningSchedule,
};

/// A base market instance plus a sequence of per-agent bound overrides —
/// one entry per timestep — encoding the wind, solar and household series.
/// Must-take steps are encoded as `p_min == p_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub instance: MarketInstance,
    pub steps: Vec<BTreeMap<AgentId, (f64, f64)>>,
    /// Duration of one step in hours; converts step powers into energies.
    pub step_hours: f64,
}

impl Scenario {
    /// A single-step scenario with the base bounds.
    pub fn single_step(instance: MarketInstance) -> Self {
        Scenario {
            instance,
            steps: vec![BTreeMap::new()],
            step_hours: 1.0,
        }
    }

    pub fn instance_at(&self, step: usize) -> Result<MarketInstance, HarnessError> {
        Ok(self.instance.with_bounds(&self.steps[step])?)
    }

    /// Scenario variant with the common criterion rule `+c` / `-c` applied
    /// to the distance criterion of every agent.
    pub fn with_common_criterion(&self, magnitude: f64) -> Result<Scenario, HarnessError> {
        Ok(Scenario {
            instance: self
                .instance
                .with_common_criterion(crate::market::DISTANCE_CRITERION, magnitude)?,
            steps: self.steps.clone(),
            step_hours: self.step_hours,
        })
    }
}

/// Outcome of one cleared timestep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub iterations: u64,
    pub converged: bool,
    /// Dispatch objective of the final iterate.
    pub objective: f64,
    /// Production/consumption cost of the symmetrized final trades.
    pub direct_cost: f64,
    /// Final trades as negotiated (not symmetrized).
    pub trades: TradeMatrix,
    pub net_injections: BTreeMap<AgentId, f64>,
    /// `|net power bus 1 -> bus 2|` of the symmetrized trades; only on
    /// two-bus scenarios.
    pub line_power: Option<f64>,
    /// Per-iteration trace, populated when the run records traces.
    pub trace: Vec<TraceRecord>,
}

/// Per-timestep summaries of one simulation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub steps: Vec<StepReport>,
    pub step_hours: f64,
    /// Steps that hit the iteration cap. Their metrics come from the last
    /// iterate, symmetrized.
    pub nonconverged_steps: Vec<usize>,
}

impl SimulationReport {
    pub fn total_iterations(&self) -> u64 {
        self.steps.iter().map(|s| s.iterations).sum()
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.total_iterations() as f64 / self.steps.len() as f64
    }

    pub fn total_direct_cost(&self) -> f64 {
        self.steps.iter().map(|s| s.direct_cost).sum()
    }
}

/// Clears every timestep in sequence. With `warm_start`, step `t` starts
/// from the final states of step `t - 1`; otherwise every step starts
/// cold. A step hitting the iteration cap is recorded, not fatal.
pub fn run_timeseries(
    scenario: &Scenario,
    tuning: &TuningSchedule,
    criteria: &StoppingCriteria,
    warm_start: bool,
    options: NegotiationOptions,
) -> Result<SimulationReport, HarnessError> {
    let net = Net::compile(&scenario.instance);
    let mut bus = MessageBus::new(net.edge_count());
    let two_bus = scenario.instance.buses().len() == 2;

    let mut report = SimulationReport {
        steps: Vec::with_capacity(scenario.steps.len()),
        step_hours: scenario.step_hours,
        nonconverged_steps: Vec::new(),
    };
    let mut carry: Option<Vec<crate::rci::LocalState>> = None;

    for step in 0..scenario.steps.len() {
        let instance = scenario.instance_at(step)?;
        let init = if warm_start { carry.take() } else { None };
        let result = run_negotiation(&instance, init, tuning, criteria, &mut bus, options)?;
        if !result.converged {
            report.nonconverged_steps.push(step);
        }
        report
            .steps
            .push(step_report(step, &instance, &result, two_bus));
        carry = Some(result.final_states);
    }
    bus.audit().verify().map_err(HarnessError::Protocol)?;
    Ok(report)
}

pub(crate) fn step_report(
    step: usize,
    instance: &MarketInstance,
    result: &ClearingResult,
    two_bus: bool,
) -> StepReport {
    let symmetrized = result.trades.symmetrized();
    let net_injections = instance
        .agents()
        .iter()
        .map(|a| (a.id.clone(), result.trades.net_injection(&a.id)))
        .collect();
    let line_power = two_bus.then(|| line_power(instance, &symmetrized));
    StepReport {
        step,
        iterations: result.iterations,
        converged: result.converged,
        objective: result.objective,
        direct_cost: direct_cost(instance, &symmetrized),
        trades: result.trades.clone(),
        net_injections,
        line_power,
        trace: result.trace.clone(),
    }
}

/// Net power crossing between the two buses: `|sum of symmetrized trades
/// from bus-1 agents to bus-2 agents|`.
pub(crate) fn line_power(instance: &MarketInstance, symmetrized: &TradeMatrix) -> f64 {
    let buses = instance.buses();
    debug_assert_eq!(buses.len(), 2);
    let bus_of: BTreeMap<&AgentId, u32> =
        instance.agents().iter().map(|a| (&a.id, a.bus)).collect();
    let mut flow = 0.0;
    for (n, m, p) in symmetrized.iter() {
        if bus_of[n] == buses[0] && bus_of[m] == buses[1] {
            flow += p;
        }
    }
    flow.abs()
}
