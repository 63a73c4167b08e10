//! The bundled twelve-agent two-bus case.
//!
//! Six generators (two wind, two PV, two fossil) and six loads (four
//! households, two industrial) split over two buses, with hourly synthetic
//! series driving the renewables as must-take units and the households as
//! flexibility bands. Bus 1 is renewable-heavy and bus 2 load-heavy, so
//! without differentiation the inter-bus line carries substantial energy.

use std::collections::BTreeMap;

use crate::harness::Scenario;
use crate::market::{MarketInstance, Role};
use crate::scenario::file::{
    AgentRecord, CriterionSpec, GraphSpec, ScenarioFile, TimestepSpec, SCHEMA_VERSION,
};
use crate::scenario::series::{generate_series, SeriesKind, SeriesSpec};

/// Seed of the scenario shipped in `data/table12.json`.
pub const BUNDLED_SEED: u64 = 42;
/// Horizon of the shipped scenario: one week, hourly.
pub const BUNDLED_STEPS: usize = 168;

/// Keep total must-take injection below this fraction of what the loads
/// can absorb at that hour, so every step stays clearable with margin.
const MUST_TAKE_HEADROOM: f64 = 0.9;

struct TimeVarying {
    id: &'static str,
    spec: SeriesSpec,
}

fn agent_records() -> Vec<AgentRecord> {
    let rec = |id: &str,
               role: Role,
               bus: u32,
               position: (f64, f64),
               a: f64,
               b: f64,
               p_min: f64,
               p_max: f64| AgentRecord {
        id: id.to_string(),
        role,
        bus,
        position,
        a,
        b,
        d: 0.0,
        p_min,
        p_max,
        criterion_values: BTreeMap::new(),
    };
    vec![
        rec(
            "wind1",
            Role::Producer,
            1,
            (-0.18, 0.15),
            0.05,
            3.0,
            0.0,
            100.0,
        ),
        rec(
            "house2",
            Role::Consumer,
            1,
            (0.06, 0.07),
            0.05,
            3.0,
            -30.0,
            0.0,
        ),
        rec(
            "fossil3",
            Role::Producer,
            1,
            (0.23, -0.12),
            0.056,
            3.0,
            15.0,
            105.0,
        ),
        rec(
            "house4",
            Role::Consumer,
            1,
            (-0.07, -0.13),
            0.056,
            3.0,
            -27.0,
            0.0,
        ),
        rec(
            "industrial5",
            Role::Consumer,
            1,
            (0.18, 0.17),
            0.04,
            8.0,
            -120.0,
            -6.0,
        ),
        rec(
            "pv6",
            Role::Producer,
            1,
            (0.01, -0.05),
            0.05,
            3.0,
            0.0,
            50.0,
        ),
        rec(
            "house7",
            Role::Consumer,
            2,
            (2.83, 0.09),
            0.05,
            3.0,
            -30.0,
            0.0,
        ),
        rec(
            "house8",
            Role::Consumer,
            2,
            (3.15, 0.12),
            0.06,
            4.0,
            -27.0,
            0.0,
        ),
        rec(
            "wind9",
            Role::Producer,
            2,
            (2.91, -0.15),
            0.05,
            3.0,
            0.0,
            100.0,
        ),
        rec(
            "fossil10",
            Role::Producer,
            2,
            (3.18, -0.09),
            0.06,
            4.0,
            20.0,
            90.0,
        ),
        rec(
            "industrial11",
            Role::Consumer,
            2,
            (3.03, 0.18),
            0.05,
            8.0,
            -120.0,
            -10.0,
        ),
        rec(
            "pv12",
            Role::Producer,
            2,
            (2.97, 0.01),
            0.05,
            3.0,
            0.0,
            50.0,
        ),
    ]
}

fn subseed(seed: u64, salt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(salt)
}

fn time_varying(seed: u64) -> Vec<TimeVarying> {
    let wind = |mean: f64| SeriesKind::Wind {
        mean,
        reversion: 0.06,
        sigma: 0.10,
    };
    let household = |scale: f64| SeriesKind::Household {
        scale,
        flexibility: 0.25,
    };
    vec![
        // One weather system: both buses see the same wind and cloud
        // draws, bus 1 just carries the stronger resource. Each bus can
        // clear on its own within a narrow price band, so differentiation
        // shifts trades intra-bus; without it the clearing mixes partners
        // freely and loads the line.
        TimeVarying {
            id: "wind1",
            spec: SeriesSpec {
                kind: wind(0.50),
                capacity_kw: 100.0,
                seed: subseed(seed, 1),
            },
        },
        TimeVarying {
            id: "pv6",
            spec: SeriesSpec {
                kind: SeriesKind::solar(),
                capacity_kw: 50.0,
                seed: subseed(seed, 2),
            },
        },
        TimeVarying {
            id: "wind9",
            spec: SeriesSpec {
                kind: wind(0.46),
                capacity_kw: 100.0,
                seed: subseed(seed, 1),
            },
        },
        TimeVarying {
            id: "pv12",
            spec: SeriesSpec {
                kind: SeriesKind::solar(),
                capacity_kw: 50.0,
                seed: subseed(seed, 2),
            },
        },
        TimeVarying {
            id: "house2",
            spec: SeriesSpec {
                kind: household(1.0),
                capacity_kw: 24.0,
                seed: subseed(seed, 5),
            },
        },
        TimeVarying {
            id: "house4",
            spec: SeriesSpec {
                kind: household(1.0),
                capacity_kw: 21.0,
                seed: subseed(seed, 6),
            },
        },
        TimeVarying {
            id: "house7",
            spec: SeriesSpec {
                kind: household(1.0),
                capacity_kw: 22.0,
                seed: subseed(seed, 7),
            },
        },
        TimeVarying {
            id: "house8",
            spec: SeriesSpec {
                kind: household(1.0),
                capacity_kw: 19.0,
                seed: subseed(seed, 8),
            },
        },
    ]
}

/// Builds the bundled scenario file: the twelve-agent market with `steps`
/// hourly timesteps generated from `seed`, distance differentiation at
/// magnitude 1 and a 1 km inter-bus characteristic.
pub fn bundled_scenario(seed: u64, steps: usize) -> ScenarioFile {
    let agents = agent_records();
    let sources = time_varying(seed);
    let series: Vec<(&str, Vec<(f64, f64)>)> = sources
        .iter()
        .map(|tv| (tv.id, generate_series(&tv.spec, steps)))
        .collect();

    let is_must_take = |id: &str| -> bool { !id.starts_with("house") };
    let fossil_floor: f64 = 15.0 + 20.0;
    let industrial_cap: f64 = 120.0 + 120.0;

    let mut timesteps = Vec::with_capacity(steps);
    for t in 0..steps {
        // Clamp the renewables so forced injection keeps headroom below
        // what industrials plus households can absorb this hour.
        let must_take: f64 = series
            .iter()
            .filter(|(id, _)| is_must_take(id))
            .map(|(_, s)| s[t].0)
            .sum();
        let absorbable: f64 = industrial_cap
            + series
                .iter()
                .filter(|(id, _)| !is_must_take(id))
                .map(|(_, s)| -s[t].0)
                .sum::<f64>();
        let budget = MUST_TAKE_HEADROOM * absorbable - fossil_floor;
        let scale = if must_take > budget && must_take > 0.0 {
            budget.max(0.0) / must_take
        } else {
            1.0
        };

        let mut step: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        for (id, s) in &series {
            let (lo, hi) = s[t];
            if is_must_take(id) {
                step.insert((*id).to_string(), (lo * scale, hi * scale));
            } else {
                step.insert((*id).to_string(), (lo, hi));
            }
        }
        timesteps.push(step);
    }

    ScenarioFile {
        version: SCHEMA_VERSION,
        step_hours: 1.0,
        inter_bus_gamma: 1.0,
        criterion: CriterionSpec::Common { magnitude: 1.0 },
        graph: GraphSpec::Complete,
        agents,
        timesteps: TimestepSpec::Inline { steps: timesteps },
    }
}

/// The base twelve-agent instance with its static bounds (renewables at
/// full range, households at their widest band).
pub fn table12_instance() -> MarketInstance {
    bundled_scenario(BUNDLED_SEED, 0)
        .compile(None)
        .expect("the bundled market is valid")
        .instance
}

/// The shipped one-week scenario, compiled.
pub fn bundled_week() -> Scenario {
    bundled_scenario(BUNDLED_SEED, BUNDLED_STEPS)
        .compile(None)
        .expect("the bundled scenario is valid")
}
