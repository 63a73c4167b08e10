//! CSV and JSON emitters. Numbers are written with Rust's shortest
//! round-trip formatting, so re-parsing a file reproduces the values
//! exactly.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use mbed_core::harness::{SimulationReport, SweepRow};

pub fn write_trace_csv(path: &Path, report: &SimulationReport) -> Result<()> {
    let mut text = String::from("iteration,consensus_err,reciprocity_err,objective\n");
    for step in &report.steps {
        for rec in &step.trace {
            text.push_str(&format!(
                "{},{},{},{}\n",
                rec.iteration, rec.consensus_error, rec.reciprocity_error, rec.objective
            ));
        }
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub struct CompareRow {
    pub step: usize,
    pub iterations: u64,
    pub gap: f64,
    pub converged: bool,
}

pub fn write_compare_csv(path: &Path, rows: &[CompareRow]) -> Result<()> {
    let mut text = String::from("step,iterations,gap,converged\n");
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{}\n",
            row.step, row.iterations, row.gap, row.converged
        ));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut text =
        String::from("c_value,interbus_energy,interbus_maxpower,direct_cost,iterations\n");
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            row.criterion_value,
            row.interbus_energy,
            row.interbus_max_power,
            row.direct_cost,
            row.mean_iterations
        ));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_report_json(path: &Path, report: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
