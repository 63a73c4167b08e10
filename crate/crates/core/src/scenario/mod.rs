//! Scenario file I/O, synthetic bound series, and the bundled twelve-agent
//! two-bus case.

mod bundled;
mod file;
mod series;
mod synth;

pub use bundled::{bundled_scenario, bundled_week, table12_instance, BUNDLED_SEED, BUNDLED_STEPS};
pub use file::{
    load_scenario, save_scenario, AgentRecord, CriterionSpec, GraphSpec, ScenarioFile,
    TimestepSpec, SCHEMA_VERSION,
};
pub use series::{generate_series, SeriesKind, SeriesSpec};
pub use synth::random_instance;
