//! Case-study metrics: inter-bus line usage and criterion sweeps.

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::harness::round::ExecMode;
use crate::harness::timeseries::{run_timeseries, Scenario, SimulationReport};
use crate::rci::NegotiationOptions;
use crate::rci::{StoppingCriteria, TuningSchedule};

/// Aggregates the inter-bus line usage of a simulation: total energy that
/// crossed the line (kWh) and the maximum line power (kW) over the
/// horizon. Only defined for two-bus scenarios.
pub fn interbus_metrics(
    report: &SimulationReport,
    scenario: &Scenario,
) -> Result<(f64, f64), HarnessError> {
    let buses = scenario.instance.buses();
    if buses.len() != 2 {
        return Err(HarnessError::UnsupportedBusCount(buses.len()));
    }
    let mut energy = 0.0;
    let mut max_power: f64 = 0.0;
    for step in &report.steps {
        let power = step
            .line_power
            .expect("two-bus simulations record line power per step");
        // Step power in kWh per step over step_hours gives kW.
        let kw = power / report.step_hours;
        energy += power;
        max_power = max_power.max(kw);
    }
    Ok((energy, max_power))
}

/// One row of a criterion sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub criterion_value: f64,
    pub interbus_energy: f64,
    pub interbus_max_power: f64,
    /// Production/consumption cost summed over the horizon.
    pub direct_cost: f64,
    /// Mean iterations to convergence per step.
    pub mean_iterations: f64,
    pub nonconverged_steps: usize,
}

/// Clears the scenario once per criterion magnitude (applied as `+c` to
/// producers and `-c` to consumers) and tabulates inter-bus metrics,
/// direct cost and iteration counts. Values must be non-negative.
pub fn criterion_sweep(
    scenario: &Scenario,
    values: &[f64],
    tuning: &TuningSchedule,
    criteria: &StoppingCriteria,
    exec: ExecMode,
) -> Result<Vec<SweepRow>, HarnessError> {
    let mut rows = Vec::with_capacity(values.len());
    for &c in values {
        assert!(c >= 0.0 && c.is_finite(), "criterion magnitudes are >= 0");
        let tuned = scenario.with_common_criterion(c)?;
        let report = run_timeseries(
            &tuned,
            tuning,
            criteria,
            true,
            NegotiationOptions {
                exec,
                record_trace: false,
            },
        )?;
        let (energy, max_power) = interbus_metrics(&report, &tuned)?;
        rows.push(SweepRow {
            criterion_value: c,
            interbus_energy: energy,
            interbus_max_power: max_power,
            direct_cost: report.total_direct_cost(),
            mean_iterations: report.mean_iterations(),
            nonconverged_steps: report.nonconverged_steps.len(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{distance_characteristics, AgentSpec, MarketInstance, Role, TradeGraph};
    use std::collections::BTreeMap;

    fn one_bus_scenario() -> Scenario {
        let agents = vec![
            AgentSpec {
                id: "gen".into(),
                role: Role::Producer,
                a: 0.1,
                b: 2.0,
                d: 0.0,
                p_min: 0.0,
                p_max: 30.0,
                position: (0.0, 0.0),
                bus: 1,
                criterion_values: BTreeMap::new(),
            },
            AgentSpec {
                id: "load".into(),
                role: Role::Consumer,
                a: 0.1,
                b: 4.0,
                d: 0.0,
                p_min: -30.0,
                p_max: 0.0,
                position: (0.5, 0.0),
                bus: 1,
                criterion_values: BTreeMap::new(),
            },
        ];
        let chars = distance_characteristics(&agents, 1.0);
        let graph = TradeGraph::complete_producer_consumer(&agents);
        Scenario::single_step(MarketInstance::new(agents, graph, chars).unwrap())
    }

    #[test]
    fn interbus_metrics_need_two_buses() {
        let scenario = one_bus_scenario();
        let report = run_timeseries(
            &scenario,
            &TuningSchedule::default(),
            &StoppingCriteria::default(),
            true,
            NegotiationOptions::default(),
        )
        .unwrap();
        assert!(matches!(
            interbus_metrics(&report, &scenario),
            Err(HarnessError::UnsupportedBusCount(1))
        ));
    }

    #[test]
    fn intra_bus_trades_yield_zero_line_use() {
        let mut scenario = one_bus_scenario();
        // Relabel the consumer to bus 2 but keep them co-trading; then move
        // it back intra-bus via a second producer/consumer pair? Simpler:
        // two buses with all trade inside bus 1.
        let mut agents = scenario.instance.agents().to_vec();
        agents.push(AgentSpec {
            id: "idle-gen".into(),
            role: Role::Producer,
            a: 0.5,
            b: 20.0,
            d: 0.0,
            p_min: 0.0,
            p_max: 5.0,
            position: (5.0, 0.0),
            bus: 2,
            criterion_values: BTreeMap::new(),
        });
        agents.push(AgentSpec {
            id: "idle-load".into(),
            role: Role::Consumer,
            a: 0.5,
            b: 0.1,
            d: 0.0,
            p_min: -5.0,
            p_max: 0.0,
            position: (5.5, 0.0),
            bus: 2,
            criterion_values: BTreeMap::new(),
        });
        let chars = distance_characteristics(&agents, 1.0);
        let graph = TradeGraph::complete_producer_consumer(&agents);
        scenario.instance = MarketInstance::new(agents, graph, chars).unwrap();
        // Strong differentiation keeps all effective trade intra-bus.
        let scenario = scenario.with_common_criterion(50.0).unwrap();
        let report = run_timeseries(
            &scenario,
            &TuningSchedule::default(),
            &StoppingCriteria::default(),
            true,
            NegotiationOptions::default(),
        )
        .unwrap();
        let (energy, max_power) = interbus_metrics(&report, &scenario).unwrap();
        assert!(energy < 0.2, "interbus energy {energy}");
        assert!(max_power < 0.2, "interbus max power {max_power}");
    }

    #[test]
    fn single_cross_bus_trade_measures_itself() {
        // One producer on bus 1, one consumer on bus 2: all energy crosses.
        let agents = vec![
            AgentSpec {
                id: "gen".into(),
                role: Role::Producer,
                a: 0.1,
                b: 2.0,
                d: 0.0,
                p_min: 0.0,
                p_max: 30.0,
                position: (0.0, 0.0),
                bus: 1,
                criterion_values: BTreeMap::new(),
            },
            AgentSpec {
                id: "load".into(),
                role: Role::Consumer,
                a: 0.1,
                b: 4.0,
                d: 0.0,
                p_min: -30.0,
                p_max: 0.0,
                position: (0.5, 0.0),
                bus: 2,
                criterion_values: BTreeMap::new(),
            },
        ];
        let chars = distance_characteristics(&agents, 1.0);
        let graph = TradeGraph::complete_producer_consumer(&agents);
        let scenario = Scenario::single_step(MarketInstance::new(agents, graph, chars).unwrap());
        let report = run_timeseries(
            &scenario,
            &TuningSchedule::default(),
            &StoppingCriteria::default(),
            true,
            NegotiationOptions::default(),
        )
        .unwrap();
        let (energy, max_power) = interbus_metrics(&report, &scenario).unwrap();
        let traded = report.steps[0].net_injections[&"gen".into()];
        assert!((energy - traded).abs() < 0.05);
        assert!((max_power - traded).abs() < 0.05);
    }
}
