//! Property suites for the market model, the negotiation updates and the
//! reference solvers.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use mbed_core::harness::{run_round, ExecMode, MessageBus};
use mbed_core::market::{
    agent_cost, check_feasibility, distance_characteristics, marginal_cost, perceived_price,
    total_cost, trading_coefficient, AgentId, AgentSpec, MarketInstance, Role, TradeGraph,
    TradeMatrix,
};
use mbed_core::rci::{
    distribution_factors, run_negotiation, LocalState, NegotiationOptions, Net, StoppingCriteria,
    TuningSchedule,
};
use mbed_core::reference::{pool_price_bisection, pool_to_mbed, solve_centralized, PoolSolution};
use mbed_core::scenario::random_instance;

fn base_agent() -> AgentSpec {
    AgentSpec {
        id: "n".into(),
        role: Role::Producer,
        a: 0.1,
        b: 2.0,
        d: 0.0,
        p_min: 0.0,
        p_max: 100.0,
        position: (0.0, 0.0),
        bus: 1,
        criterion_values: BTreeMap::new(),
    }
}

proptest! {
    /// Doubling every criterion value doubles the trading coefficient.
    #[test]
    fn trading_coefficient_is_linear_in_criterion_values(
        values in proptest::collection::vec((0usize..4, -5.0f64..5.0), 1..4),
        gammas in proptest::collection::vec(0.0f64..10.0, 4),
    ) {
        let names = ["dist", "co2", "vote", "origin"];
        let mut agent = base_agent();
        let mut chars = mbed_core::market::TradeCharacteristics::new();
        for (slot, value) in &values {
            agent.criterion_values.insert(names[*slot].to_string(), *value);
        }
        for (i, name) in names.iter().enumerate() {
            chars.set(*name, "n".into(), "m".into(), gammas[i]);
        }
        let single = trading_coefficient(&agent, (&"n".into(), &"m".into()), &chars).unwrap();
        let mut doubled = agent.clone();
        for v in doubled.criterion_values.values_mut() {
            *v *= 2.0;
        }
        let twice = trading_coefficient(&doubled, (&"n".into(), &"m".into()), &chars).unwrap();
        prop_assert!((twice - 2.0 * single).abs() <= 1e-12 * single.abs().max(1.0));
    }

    /// The analytic gradient a p + b matches central finite differences.
    #[test]
    fn cost_gradient_matches_finite_differences(
        a in 0.01f64..1.0,
        b in 0.0f64..10.0,
        p in -100.0f64..100.0,
    ) {
        let mut agent = base_agent();
        agent.a = a;
        agent.b = b;
        let h = 1e-4 * p.abs().max(1.0);
        let numeric = (agent_cost(&agent, p + h) - agent_cost(&agent, p - h)) / (2.0 * h);
        let analytic = marginal_cost(&agent, p);
        prop_assert!(
            (numeric - analytic).abs() <= 1e-6 * analytic.abs().max(1.0),
            "numeric {numeric} vs analytic {analytic}"
        );
    }

    /// Perceived price with a zero coefficient is the trading price.
    #[test]
    fn perceived_price_identity(lambda in -100.0f64..100.0) {
        prop_assert_eq!(perceived_price(lambda, 0.0), lambda);
    }

    /// Distribution factors are positive and sum to one.
    #[test]
    fn distribution_factors_form_a_partition(
        trades in proptest::collection::vec(-50.0f64..50.0, 1..12),
        delta in 0.01f64..5.0,
    ) {
        let f = distribution_factors(&trades, delta).unwrap();
        prop_assert!(f.iter().all(|x| *x > 0.0 && *x <= 1.0));
        let sum: f64 = f.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    /// The objective is invariant under re-orienting a balanced pair.
    #[test]
    fn total_cost_ignores_stored_orientation_of_balanced_pairs(amount in 0.0f64..20.0) {
        let instance = common::two_agent_instance();
        let mut forward = TradeMatrix::new();
        forward.set("gen".into(), "load".into(), amount);
        forward.set("load".into(), "gen".into(), -amount);
        let mut mirrored = TradeMatrix::new();
        mirrored.set("load".into(), "gen".into(), -amount);
        mirrored.set("gen".into(), "load".into(), amount);
        prop_assert_eq!(
            total_cost(&instance, &forward),
            total_cost(&instance, &mirrored)
        );
    }
}

#[test]
fn feasibility_flags_every_perturbation_kind() {
    // Start from a feasible balanced point and apply each violating
    // perturbation; the report must name it.
    let instance = common::two_agent_instance();
    let mut rng_seedable: u64 = 0x5eed;
    let mut next = move || {
        rng_seedable = rng_seedable
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1);
        ((rng_seedable >> 33) as f64) / (u32::MAX as f64)
    };

    for _ in 0..200 {
        let amount = 20.0 * next();
        let mut trades = TradeMatrix::new();
        trades.set("gen".into(), "load".into(), amount.min(20.0));
        trades.set("load".into(), "gen".into(), -amount.min(20.0));
        assert!(check_feasibility(&instance, &trades, 1e-9).is_feasible());

        let kind = (next() * 3.0) as usize;
        let bump = 0.5 + 10.0 * next();
        let mut broken = trades.clone();
        match kind {
            0 => broken.set("gen".into(), "load".into(), amount + bump), // reciprocity
            1 => broken.set("gen".into(), "load".into(), -bump),         // sign (and reciprocity)
            _ => {
                broken.set("gen".into(), "load".into(), 20.0 + bump); // bound
                broken.set("load".into(), "gen".into(), -20.0 - bump);
            }
        }
        assert!(
            !check_feasibility(&instance, &broken, 1e-9).is_feasible(),
            "perturbation kind {kind} with bump {bump} went undetected"
        );
    }
}

#[test]
fn sign_feasibility_holds_after_every_iteration() {
    let instance = random_instance(3, 1.0);
    let net = Net::compile(&instance);
    let mut bus = MessageBus::new(net.edge_count());
    let mut states = net.cold_states();
    let tuning = TuningSchedule::default();

    for ctx in net.agents() {
        for (j, &m) in ctx.neighbors.iter().enumerate() {
            bus.deliver(
                ctx.edge_base + j,
                mbed_core::rci::TradeMessage {
                    sender: ctx.index,
                    receiver: m,
                    power: 0.0,
                    lambda: 0.0,
                },
            )
            .unwrap();
        }
    }
    for k in 1..=500 {
        states = run_round(&net, &mut bus, &states, k, &tuning, ExecMode::Serial).unwrap();
        for (ctx, state) in net.agents().iter().zip(&states) {
            assert!(
                state.is_consistent(ctx.spec.role, ctx.neighbors.len()),
                "iteration {k}: agent {} violated sign feasibility",
                ctx.spec.id
            );
        }
    }
}

#[test]
fn negotiation_is_deterministic_and_parallel_agrees() {
    let instance = random_instance(11, 1.0);
    let tuning = TuningSchedule::default();
    let criteria = StoppingCriteria::default();

    let run = |exec: ExecMode| {
        let mut bus = MessageBus::new(instance.graph().directed_edge_count());
        run_negotiation(
            &instance,
            None,
            &tuning,
            &criteria,
            &mut bus,
            NegotiationOptions {
                exec,
                record_trace: true,
            },
        )
        .unwrap()
    };

    let serial_a = run(ExecMode::Serial);
    let serial_b = run(ExecMode::Serial);
    let parallel = run(ExecMode::Parallel);

    assert_eq!(serial_a.iterations, serial_b.iterations);
    assert_eq!(serial_a.trades, serial_b.trades);
    assert_eq!(serial_a.trades, parallel.trades);
    assert_eq!(serial_a.prices, parallel.prices);
    // Bit-identical traces, not just close ones.
    for (x, y) in serial_a.trace.iter().zip(&parallel.trace) {
        assert_eq!(x.objective.to_bits(), y.objective.to_bits());
        assert_eq!(x.consensus_error.to_bits(), y.consensus_error.to_bits());
    }
}

#[test]
fn converged_runs_meet_the_empirical_residual_bounds() {
    // At a converged state the price updates have stalled, which caps the
    // residuals: the consensus gap at 10 eps_lambda, and the reciprocity
    // gap at the innovation-term ceiling eps_lambda / alpha_k (the price
    // change a reciprocity gap can still cause; about 10.7 eps_p at the
    // default tuning and observed stopping iterations).
    let tuning = TuningSchedule::default();
    let criteria = StoppingCriteria::default();
    for seed in [0u64, 7, 21, 33] {
        let instance = random_instance(seed, 1.0);
        let (result, _) = common::clear(&instance, &tuning, &criteria);
        assert!(result.converged, "seed {seed}");
        let mut consensus: f64 = 0.0;
        let mut reciprocity: f64 = 0.0;
        for (n, m, p) in result.trades.iter() {
            reciprocity = reciprocity.max((p + result.trades.get(m, n)).abs());
            let gap = (result.prices[&(n.clone(), m.clone())]
                - result.prices[&(m.clone(), n.clone())])
                .abs();
            consensus = consensus.max(gap);
        }
        assert!(
            consensus <= 10.0 * criteria.eps_lambda,
            "seed {seed}: consensus {consensus}"
        );
        let stall_ceiling = criteria.eps_lambda / tuning.alpha.value(result.iterations);
        assert!(
            reciprocity <= stall_ceiling,
            "seed {seed}: reciprocity {reciprocity} beyond {stall_ceiling}"
        );
    }
}

#[test]
fn warm_start_state_shapes_are_validated() {
    let instance = common::two_agent_instance();
    let mut bus = MessageBus::new(2);
    let bad = vec![LocalState::cold(5), LocalState::cold(5)];
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        run_negotiation(
            &instance,
            Some(bad),
            &TuningSchedule::default(),
            &StoppingCriteria::default(),
            &mut bus,
            NegotiationOptions::default(),
        )
    }));
    assert!(outcome.is_err(), "mis-shaped warm start must be rejected");
}

// --- reference-solver properties -----------------------------------------

fn random_pool_agents(seed: u64) -> Vec<AgentSpec> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let producers = rng.gen_range(1..=4);
    let consumers = rng.gen_range(1..=4);
    let mut agents = Vec::new();
    for i in 0..producers {
        let mut a = base_agent();
        a.id = AgentId::new(format!("p{i}"));
        a.a = rng.gen_range(0.02..0.2);
        a.b = rng.gen_range(1.0..5.0);
        a.p_min = 0.0;
        a.p_max = rng.gen_range(5.0..80.0);
        agents.push(a);
    }
    for i in 0..consumers {
        let mut c = base_agent();
        c.id = AgentId::new(format!("c{i}"));
        c.role = Role::Consumer;
        c.a = rng.gen_range(0.02..0.2);
        c.b = rng.gen_range(2.0..9.0);
        c.p_min = -rng.gen_range(5.0..80.0);
        c.p_max = 0.0;
        agents.push(c);
    }
    agents
}

fn pool_instance(agents: Vec<AgentSpec>) -> MarketInstance {
    let chars = distance_characteristics(&agents, 1.0);
    let graph = TradeGraph::complete_producer_consumer(&agents);
    MarketInstance::new(agents, graph, chars).unwrap()
}

#[test]
fn pool_construction_is_feasible_across_a_thousand_instances() {
    let mut built = 0;
    let mut seed = 0u64;
    while built < 1000 {
        seed += 1;
        let agents = random_pool_agents(seed);
        let pool = match pool_price_bisection(&agents, 1e-9) {
            Ok(pool) => pool,
            Err(_) => continue, // supply and demand curves may not overlap
        };
        let instance = pool_instance(agents);
        let trades = pool_to_mbed(&instance, &pool).unwrap();
        let report = check_feasibility(&instance, &trades, 1e-9);
        assert!(report.is_feasible(), "seed {seed}: {:?}", report.violations);
        built += 1;
    }
}

#[test]
fn strong_duality_holds_at_the_central_optimum() {
    // Evaluate the full Lagrangian at the reported primal/dual point; at
    // the optimum every penalty term vanishes, so L equals the objective.
    for seed in 0..20u64 {
        let instance = random_instance(seed, 1.0);
        let sol = solve_centralized(&instance, 1e-8).unwrap();
        let mut lagrangian = sol.objective;
        for agent in instance.agents() {
            let p_n = sol.trades.net_injection(&agent.id);
            lagrangian += sol.mu_up[&agent.id] * (p_n - agent.p_max);
            lagrangian += sol.mu_down[&agent.id] * (agent.p_min - p_n);
        }
        for (n, m, p) in sol.trades.iter() {
            if n < m {
                lagrangian += sol.prices[&(n.clone(), m.clone())] * (p + sol.trades.get(m, n));
            }
        }
        let scale = sol.objective.abs().max(1.0);
        assert!(
            (lagrangian - sol.objective).abs() <= 1e-6 * scale,
            "seed {seed}: L {lagrangian} vs C {}",
            sol.objective
        );
    }
}

#[test]
fn central_and_pool_injections_agree_without_differentiation() {
    for seed in 0..20u64 {
        let instance = random_instance(seed, 0.0);
        let central = solve_centralized(&instance, 1e-8).unwrap();
        let pool = pool_price_bisection(instance.agents(), 1e-10).unwrap();
        for agent in instance.agents() {
            let diff = (central.trades.net_injection(&agent.id) - pool.injections[&agent.id]).abs();
            assert!(diff <= 1e-6, "seed {seed} {}: {diff}", agent.id);
        }
    }
}

#[test]
fn degenerate_pool_inputs_are_rejected() {
    let instance = pool_instance(random_pool_agents(1));
    let producer = instance.producers().next().unwrap().id.clone();
    let mut injections: BTreeMap<AgentId, f64> = instance
        .agents()
        .iter()
        .map(|a| (a.id.clone(), 0.0))
        .collect();
    injections.insert(producer, 5.0);
    let pool = PoolSolution {
        price: 3.0,
        injections,
    };
    assert!(pool_to_mbed(&instance, &pool).is_err());
}

// --- harness-level oracle checks ------------------------------------------

#[test]
fn bundled_instance_cold_clear_stays_within_half_a_percent_of_central() {
    use mbed_core::reference::optimality_gap;
    use mbed_core::scenario::bundled_week;

    let week = bundled_week();
    let instance = week.instance_at(0).unwrap();
    let (result, _) = common::clear(
        &instance,
        &TuningSchedule::default(),
        &StoppingCriteria::default(),
    );
    assert!(result.converged);
    let central = solve_centralized(&instance, 1e-8).unwrap();
    let gap = optimality_gap(&instance, &result, &central);
    assert!(gap.abs() <= 0.005, "gap {gap}");
}

#[test]
fn warm_and_cold_starts_agree_on_objectives_step_by_step() {
    use mbed_core::harness::run_timeseries;
    use mbed_core::scenario::bundled_scenario;

    let scenario = bundled_scenario(5, 24).compile(None).unwrap();
    let tuning = TuningSchedule::default();
    let criteria = StoppingCriteria::default();
    let warm =
        run_timeseries(&scenario, &tuning, &criteria, true, NegotiationOptions::default()).unwrap();
    let cold =
        run_timeseries(&scenario, &tuning, &criteria, false, NegotiationOptions::default()).unwrap();

    // Initialization affects speed, not the optimum: per-step objectives
    // agree within twice the acceptance gap bound.
    for (w, c) in warm.steps.iter().zip(&cold.steps) {
        let scale = c.objective.abs().max(1.0);
        assert!(
            (w.objective - c.objective).abs() <= 2.0 * 0.05 * scale,
            "step {}: warm {} vs cold {}",
            w.step,
            w.objective,
            c.objective
        );
    }
}

#[test]
fn sweep_at_zero_matches_the_pool_oracle_dispatch_costs() {
    use mbed_core::harness::criterion_sweep;
    use mbed_core::market::agent_cost as cost_of;
    use mbed_core::scenario::bundled_scenario;

    // Trades are degenerate without differentiation, so the comparison
    // quantity is the injection-determined direct cost, not the trade
    // split.
    let scenario = bundled_scenario(9, 12).compile(None).unwrap();
    let rows = criterion_sweep(
        &scenario,
        &[0.0],
        &TuningSchedule::default(),
        &StoppingCriteria::default(),
        ExecMode::Serial,
    )
    .unwrap();

    let mut pool_direct = 0.0;
    for step in 0..scenario.steps.len() {
        let instance = scenario.instance_at(step).unwrap();
        let pool = pool_price_bisection(instance.agents(), 1e-9).unwrap();
        pool_direct += instance
            .agents()
            .iter()
            .map(|a| cost_of(a, pool.injections[&a.id]))
            .sum::<f64>();
    }
    let got = rows[0].direct_cost;
    assert!(
        (got - pool_direct).abs() <= 0.01 * pool_direct.abs().max(1.0),
        "sweep c=0 direct cost {got} vs pool {pool_direct}"
    );
}
