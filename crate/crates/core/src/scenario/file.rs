//! The scenario file format: a single JSON document describing agents,
//! graph, differentiation and the timestep bound series (inline or in a
//! sidecar CSV).
//!
//! Files written by [`save_scenario`] are canonical: loading and saving a
//! canonical file reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::harness::Scenario;
use crate::market::{
    distance_characteristics, AgentId, AgentSpec, MarketInstance, Role, TradeGraph,
    DISTANCE_CRITERION,
};

pub const SCHEMA_VERSION: u32 = 1;

/// How agents value the distance criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionSpec {
    /// `+magnitude` on producers, `-magnitude` on consumers. Agents with
    /// explicit `criterion_values` override the rule.
    Common { magnitude: f64 },
    /// Use each agent's `criterion_values` exactly as written.
    PerAgent,
}

/// The trading scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSpec {
    /// Every producer may trade with every consumer.
    Complete,
    /// Explicit undirected edges by agent id.
    Explicit { edges: Vec<(String, String)> },
}

/// Timestep bound overrides: inline, or a sidecar CSV with columns
/// `step,agent,p_min,p_max` (resolved relative to the scenario file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimestepSpec {
    Inline {
        steps: Vec<BTreeMap<String, (f64, f64)>>,
    },
    SeriesFile {
        path: String,
    },
}

/// One agent row of the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: String,
    pub role: Role,
    pub bus: u32,
    pub position: (f64, f64),
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub d: f64,
    pub p_min: f64,
    pub p_max: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub criterion_values: BTreeMap<String, f64>,
}

/// The serialized scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub version: u32,
    pub step_hours: f64,
    /// Distance characteristic assigned to every cross-bus pair, km.
    pub inter_bus_gamma: f64,
    pub criterion: CriterionSpec,
    pub graph: GraphSpec,
    pub agents: Vec<AgentRecord>,
    pub timesteps: TimestepSpec,
}

impl ScenarioFile {
    /// Validates the document and builds the executable scenario.
    /// `base_dir` resolves a sidecar series path; `None` restricts the
    /// document to inline timesteps.
    pub fn compile(&self, base_dir: Option<&Path>) -> Result<Scenario, ScenarioError> {
        if self.version != SCHEMA_VERSION {
            return Err(ScenarioError::UnsupportedVersion(self.version));
        }

        let agents: Vec<AgentSpec> = self
            .agents
            .iter()
            .map(|rec| {
                let criterion_values = if !rec.criterion_values.is_empty() {
                    rec.criterion_values.clone()
                } else {
                    match &self.criterion {
                        CriterionSpec::Common { magnitude } => {
                            let value = match rec.role {
                                Role::Producer => *magnitude,
                                Role::Consumer => -*magnitude,
                            };
                            BTreeMap::from([(DISTANCE_CRITERION.to_string(), value)])
                        }
                        CriterionSpec::PerAgent => BTreeMap::new(),
                    }
                };
                AgentSpec {
                    id: AgentId::new(rec.id.clone()),
                    role: rec.role,
                    a: rec.a,
                    b: rec.b,
                    d: rec.d,
                    p_min: rec.p_min,
                    p_max: rec.p_max,
                    position: rec.position,
                    bus: rec.bus,
                    criterion_values,
                }
            })
            .collect();

        let graph = match &self.graph {
            GraphSpec::Complete => TradeGraph::complete_producer_consumer(&agents),
            GraphSpec::Explicit { edges } => TradeGraph::from_edges(
                edges
                    .iter()
                    .map(|(a, b)| (AgentId::new(a.clone()), AgentId::new(b.clone()))),
            ),
        };
        let characteristics = distance_characteristics(&agents, self.inter_bus_gamma);
        let instance = MarketInstance::new(agents, graph, characteristics)?;

        let raw_steps: RawSteps = match &self.timesteps {
            TimestepSpec::Inline { steps } => steps.clone(),
            TimestepSpec::SeriesFile { path } => {
                let resolved: PathBuf = match base_dir {
                    Some(dir) => dir.join(path),
                    None => PathBuf::from(path),
                };
                read_series_csv(&resolved)?
            }
        };

        let mut steps = Vec::with_capacity(raw_steps.len());
        for (step, overrides) in raw_steps.into_iter().enumerate() {
            let mut converted = BTreeMap::new();
            for (id, (lo, hi)) in overrides {
                let agent_id = AgentId::new(id.clone());
                let agent = instance.agent(&agent_id).ok_or_else(|| {
                    ScenarioError::UnknownOverrideAgent {
                        step,
                        agent: id.clone(),
                    }
                })?;
                agent
                    .with_bounds(lo, hi)
                    .map_err(|source| ScenarioError::InvalidOverride {
                        step,
                        agent: id.clone(),
                        source,
                    })?;
                converted.insert(agent_id, (lo, hi));
            }
            steps.push(converted);
        }

        Ok(Scenario {
            instance,
            steps,
            step_hours: self.step_hours,
        })
    }

    /// Canonical JSON rendering: pretty-printed, trailing newline.
    pub fn canonical_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("scenario files serialize");
        text.push('\n');
        text
    }
}

type RawSteps = Vec<BTreeMap<String, (f64, f64)>>;

fn read_series_csv(path: &Path) -> Result<RawSteps, ScenarioError> {
    let io_err = |source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => io_err(io),
            other => ScenarioError::SeriesRow {
                row: 0,
                message: format!("{other:?}"),
            },
        })?;

    let mut steps: Vec<BTreeMap<String, (f64, f64)>> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ScenarioError::SeriesRow {
            row: row + 1,
            message: e.to_string(),
        })?;
        let field = |i: usize| -> Result<&str, ScenarioError> {
            record.get(i).ok_or(ScenarioError::SeriesRow {
                row: row + 1,
                message: format!("missing column {i} (want step,agent,p_min,p_max)"),
            })
        };
        let parse = |i: usize| -> Result<f64, ScenarioError> {
            field(i)?
                .trim()
                .parse()
                .map_err(|e| ScenarioError::SeriesRow {
                    row: row + 1,
                    message: format!("column {i}: {e}"),
                })
        };
        let step: usize = field(0)?
            .trim()
            .parse()
            .map_err(|e| ScenarioError::SeriesRow {
                row: row + 1,
                message: format!("step column: {e}"),
            })?;
        let agent = field(1)?.trim().to_string();
        let (lo, hi) = (parse(2)?, parse(3)?);
        if steps.len() <= step {
            steps.resize_with(step + 1, BTreeMap::new);
        }
        steps[step].insert(agent, (lo, hi));
    }
    Ok(steps)
}

/// Loads and validates a scenario document, returning both the document
/// (for lossless re-saving) and the compiled scenario.
pub fn load_scenario(path: &Path) -> Result<(ScenarioFile, Scenario), ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: ScenarioFile =
        serde_json::from_str(&text).map_err(|source| ScenarioError::Parse {
            path: path.display().to_string(),
            source,
        })?;
    let scenario = file.compile(path.parent())?;
    Ok((file, scenario))
}

/// Writes the canonical rendering of a scenario document.
pub fn save_scenario(file: &ScenarioFile, path: &Path) -> Result<(), ScenarioError> {
    fs::write(path, file.canonical_json()).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}
