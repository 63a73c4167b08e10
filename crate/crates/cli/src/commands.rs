//! Subcommand implementations.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde_json::json;

use mbed_core::harness::{criterion_sweep, run_timeseries, ExecMode, Scenario, SimulationReport};
use mbed_core::rci::{NegotiationOptions, PowerSequence, StoppingCriteria, TuningSchedule};
use mbed_core::reference::{gap_against_central, solve_centralized, DEFAULT_TOLERANCE};
use mbed_core::scenario::{bundled_scenario, load_scenario, save_scenario};

use crate::output;
use crate::RunArgs;

fn parse_floats(text: &str, want: usize, what: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("parsing {what} from {text:?}"))?;
    if values.len() != want {
        bail!(
            "{what} wants {want} comma-separated values, got {}",
            values.len()
        );
    }
    Ok(values)
}

fn tuning_of(args: &RunArgs) -> Result<TuningSchedule> {
    match &args.tuning {
        None => Ok(TuningSchedule::default()),
        Some(text) => {
            let v = parse_floats(text, 6, "--tuning")?;
            Ok(TuningSchedule {
                alpha: PowerSequence::new(v[0], v[1]),
                beta: PowerSequence::new(v[2], v[3]),
                eta: PowerSequence::constant(v[4]),
                delta: PowerSequence::constant(v[5]),
            })
        }
    }
}

fn criteria_of(args: &RunArgs) -> Result<StoppingCriteria> {
    let mut criteria = StoppingCriteria::default();
    if let Some(text) = &args.eps {
        let v = parse_floats(text, 3, "--eps")?;
        criteria.eps_lambda = v[0];
        criteria.eps_p = v[1];
        criteria.eps_mu = v[2];
    }
    if let Some(cap) = args.max_iter {
        criteria.max_iterations = cap;
    }
    Ok(criteria)
}

fn scenario_of(args: &RunArgs) -> Result<Scenario> {
    let (_, mut scenario) = load_scenario(&args.scenario)
        .with_context(|| format!("loading {}", args.scenario.display()))?;
    if let Some(c) = args.criterion_value {
        scenario = scenario.with_common_criterion(c)?;
    }
    Ok(scenario)
}

fn options_of(args: &RunArgs, record_trace: bool) -> NegotiationOptions {
    NegotiationOptions {
        exec: if args.parallel {
            ExecMode::Parallel
        } else {
            ExecMode::Serial
        },
        record_trace,
    }
}

fn ensure_out_dir(args: &RunArgs) -> Result<()> {
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output directory {}", args.out.display()))
}

fn step_summaries(report: &SimulationReport) -> Vec<serde_json::Value> {
    report
        .steps
        .iter()
        .map(|s| {
            json!({
                "step": s.step,
                "iterations": s.iterations,
                "converged": s.converged,
                "objective": s.objective,
                "direct_cost": s.direct_cost,
                "line_power": s.line_power,
            })
        })
        .collect()
}

fn strict_exit(args: &RunArgs, nonconverged: usize) -> ExitCode {
    if args.strict && nonconverged > 0 {
        eprintln!("{nonconverged} timestep(s) did not converge");
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

pub fn run(args: &RunArgs) -> Result<ExitCode> {
    let scenario = scenario_of(args)?;
    let tuning = tuning_of(args)?;
    let criteria = criteria_of(args)?;
    ensure_out_dir(args)?;

    let report = run_timeseries(
        &scenario,
        &tuning,
        &criteria,
        args.warm_start,
        options_of(args, true),
    )?;

    output::write_trace_csv(&args.out.join("trace.csv"), &report)?;
    let aggregate = json!({
        "command": "run",
        "scenario": args.scenario.display().to_string(),
        "seed": args.seed,
        "steps": report.steps.len(),
        "nonconverged_steps": report.nonconverged_steps,
        "total_iterations": report.total_iterations(),
        "mean_iterations": report.mean_iterations(),
        "total_direct_cost": report.total_direct_cost(),
        "per_step": step_summaries(&report),
    });
    output::write_report_json(&args.out.join("report.json"), &aggregate)?;

    println!(
        "cleared {} step(s), mean iterations {:.1}, trace written to {}",
        report.steps.len(),
        report.mean_iterations(),
        args.out.join("trace.csv").display()
    );
    Ok(strict_exit(args, report.nonconverged_steps.len()))
}

pub fn compare(args: &RunArgs) -> Result<ExitCode> {
    let scenario = scenario_of(args)?;
    let tuning = tuning_of(args)?;
    let criteria = criteria_of(args)?;
    ensure_out_dir(args)?;

    let report = run_timeseries(
        &scenario,
        &tuning,
        &criteria,
        args.warm_start,
        options_of(args, false),
    )?;

    let mut rows = Vec::with_capacity(report.steps.len());
    for step in &report.steps {
        let instance = scenario.instance_at(step.step)?;
        let central = solve_centralized(&instance, DEFAULT_TOLERANCE)
            .with_context(|| format!("centralized solve of step {}", step.step))?;
        rows.push(output::CompareRow {
            step: step.step,
            iterations: step.iterations,
            gap: gap_against_central(&instance, &step.trades, &central),
            converged: step.converged,
        });
    }
    output::write_compare_csv(&args.out.join("compare.csv"), &rows)?;

    let mut gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    gaps.sort_by(f64::total_cmp);
    let aggregate = json!({
        "command": "compare",
        "scenario": args.scenario.display().to_string(),
        "seed": args.seed,
        "steps": rows.len(),
        "nonconverged_steps": report.nonconverged_steps,
        "mean_iterations": report.mean_iterations(),
        "gap_max": gaps.last().copied(),
        "gap_median": gaps.get(gaps.len() / 2).copied(),
        "gap_min": gaps.first().copied(),
    });
    output::write_report_json(&args.out.join("report.json"), &aggregate)?;

    println!(
        "compared {} step(s); worst gap {:.4}%",
        rows.len(),
        gaps.last().copied().unwrap_or(0.0) * 100.0
    );
    Ok(strict_exit(args, report.nonconverged_steps.len()))
}

pub fn sweep(values_text: &str, args: &RunArgs) -> Result<ExitCode> {
    let values: Vec<f64> = values_text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("parsing sweep values from {values_text:?}"))?;
    if values.is_empty() {
        bail!("sweep wants at least one criterion value");
    }
    if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        bail!("criterion values must be finite and non-negative");
    }

    let scenario = scenario_of(args)?;
    let tuning = tuning_of(args)?;
    let criteria = criteria_of(args)?;
    ensure_out_dir(args)?;

    let exec = if args.parallel {
        ExecMode::Parallel
    } else {
        ExecMode::Serial
    };
    let rows = criterion_sweep(&scenario, &values, &tuning, &criteria, exec)?;
    output::write_sweep_csv(&args.out.join("sweep.csv"), &rows)?;

    let nonconverged: usize = rows.iter().map(|r| r.nonconverged_steps).sum();
    let aggregate = json!({
        "command": "sweep",
        "scenario": args.scenario.display().to_string(),
        "seed": args.seed,
        "values": values,
        "rows": rows.iter().map(|r| json!({
            "c_value": r.criterion_value,
            "interbus_energy": r.interbus_energy,
            "interbus_maxpower": r.interbus_max_power,
            "direct_cost": r.direct_cost,
            "mean_iterations": r.mean_iterations,
            "nonconverged_steps": r.nonconverged_steps,
        })).collect::<Vec<_>>(),
    });
    output::write_report_json(&args.out.join("report.json"), &aggregate)?;

    println!(
        "swept {} criterion value(s), sweep written to {}",
        rows.len(),
        args.out.join("sweep.csv").display()
    );
    Ok(strict_exit(args, nonconverged))
}

pub fn gen(out: &Path, steps: usize, seed: u64) -> Result<ExitCode> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = bundled_scenario(seed, steps);
    save_scenario(&file, out)?;
    println!(
        "wrote {} ({} agents, {steps} steps, seed {seed})",
        out.display(),
        file.agents.len()
    );
    Ok(ExitCode::SUCCESS)
}
