//! Random well-posed twelve-agent instances for verification runs.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::market::{
    distance_characteristics, AgentId, AgentSpec, MarketInstance, Role, TradeGraph,
    DISTANCE_CRITERION,
};

/// Samples a twelve-agent two-bus instance with the bundled case's cast
/// (two wind, two PV, two fossil, four households, two industrial loads)
/// and parameters drawn within the same ranges. Renewables are must-take
/// at a sampled output. The draws keep total forced injection strictly
/// below what the loads can absorb, so every sampled instance clears.
pub fn random_instance(seed: u64, criterion_magnitude: f64) -> MarketInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut agents: Vec<AgentSpec> = Vec::with_capacity(12);
    let mut push = |id: &str,
                    role: Role,
                    bus: u32,
                    a: f64,
                    b: f64,
                    p_min: f64,
                    p_max: f64,
                    position: (f64, f64)| {
        let value = match role {
            Role::Producer => criterion_magnitude,
            Role::Consumer => -criterion_magnitude,
        };
        agents.push(AgentSpec {
            id: AgentId::new(id),
            role,
            a,
            b,
            d: 0.0,
            p_min,
            p_max,
            position,
            bus,
            criterion_values: BTreeMap::from([(DISTANCE_CRITERION.to_string(), value)]),
        });
    };

    let spot = |rng: &mut ChaCha8Rng, bus: u32| -> (f64, f64) {
        let center = if bus == 1 { 0.0 } else { 3.0 };
        (
            center + rng.gen_range(-0.35..0.35),
            rng.gen_range(-0.35..0.35),
        )
    };

    for (i, bus) in [(0u32, 1u32), (1, 2)] {
        let wind = rng.gen_range(0.0..70.0);
        let pos = spot(&mut rng, bus);
        push(
            &format!("wind{}", i + 1),
            Role::Producer,
            bus,
            rng.gen_range(0.04..0.06),
            rng.gen_range(3.0..4.0),
            wind,
            wind,
            pos,
        );

        let pv = rng.gen_range(0.0..35.0);
        let pos = spot(&mut rng, bus);
        push(
            &format!("pv{}", i + 1),
            Role::Producer,
            bus,
            rng.gen_range(0.04..0.06),
            rng.gen_range(3.0..4.0),
            pv,
            pv,
            pos,
        );

        let floor = rng.gen_range(5.0..20.0);
        let pos = spot(&mut rng, bus);
        push(
            &format!("fossil{}", i + 1),
            Role::Producer,
            bus,
            rng.gen_range(0.04..0.06),
            rng.gen_range(3.0..4.0),
            floor,
            rng.gen_range(80.0..110.0),
            pos,
        );

        for h in 0..2 {
            let base = rng.gen_range(8.0..30.0);
            let pos = spot(&mut rng, bus);
            // Household utilities span the full range of the load table so
            // the surplus at the optimum stays well away from zero and
            // relative gaps remain well-conditioned.
            push(
                &format!("house{}{}", i + 1, h + 1),
                Role::Consumer,
                bus,
                rng.gen_range(0.04..0.06),
                rng.gen_range(3.5..8.0),
                -1.25 * base,
                -0.75 * base,
                pos,
            );
        }

        let pos = spot(&mut rng, bus);
        push(
            &format!("industrial{}", i + 1),
            Role::Consumer,
            bus,
            rng.gen_range(0.04..0.05),
            8.0,
            -120.0,
            -rng.gen_range(6.0..10.0),
            pos,
        );
    }

    let characteristics = distance_characteristics(&agents, 1.0);
    let graph = TradeGraph::complete_producer_consumer(&agents);
    MarketInstance::new(agents, graph, characteristics).expect("sampled instances are valid")
}
