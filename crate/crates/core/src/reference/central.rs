//! Centralized reference solution of the dispatch and the optimality-gap
//! measurement against negotiation outcomes.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::market::{kkt_residual, total_cost, AgentId, MarketInstance, Role, TradeMatrix};
use crate::rci::ClearingResult;
use crate::reference::qp::{solve, QpProblem, QpSettings};

/// Default target on the KKT residual of the centralized solution.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// A centralized optimum: trades, mirrored trade prices, bound
/// multipliers, objective value and the first-order residual achieved.
///
/// The optimum is unique in net injections; the trade split itself can be
/// degenerate when differentiation vanishes, so cross-solver comparisons
/// should use net injections or the objective, never raw trades.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CentralSolution {
    pub trades: TradeMatrix,
    /// `lambda` per directed edge; mirrored so both directions agree.
    pub prices: BTreeMap<(AgentId, AgentId), f64>,
    pub mu_up: BTreeMap<AgentId, f64>,
    pub mu_down: BTreeMap<AgentId, f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: u64,
}

/// One reduced variable: the trade of an unordered producer-consumer pair,
/// oriented producer -> consumer.
struct Pair {
    producer: usize,
    consumer: usize,
}

/// Solves the dispatch centrally on the reduced per-pair variables
/// (reciprocity eliminated, so each unordered pair is a single
/// non-negative quantity) and mirrors the duals back onto directed edges.
///
/// The method is a dense ADMM with prefactorized linear solves — nothing
/// is shared with the decentralized iteration.
pub fn solve_centralized(
    instance: &MarketInstance,
    tol: f64,
) -> Result<CentralSolution, SolveError> {
    assert!(tol > 0.0);
    let agents = instance.agents();
    let n_agents = agents.len();

    let sum_min: f64 = agents.iter().map(|a| a.p_min).sum();
    let sum_max: f64 = agents.iter().map(|a| a.p_max).sum();
    if sum_min > 0.0 {
        return Err(SolveError::Infeasible(format!(
            "total lower bounds force a net injection of {sum_min:.6} kWh"
        )));
    }
    if sum_max < 0.0 {
        return Err(SolveError::Infeasible(format!(
            "total upper bounds force a net withdrawal of {:.6} kWh",
            -sum_max
        )));
    }

    // Reduced variables: one per producer-consumer pair with an edge.
    // Same-role edges carry no variable; reciprocity plus the sign
    // constraints pin them to zero.
    let mut pairs = Vec::new();
    for (i, a) in agents.iter().enumerate() {
        if a.role != Role::Producer {
            continue;
        }
        for m in instance.graph().neighbors(&a.id) {
            let j = instance.index_of(m).unwrap();
            if agents[j].role == Role::Consumer {
                pairs.push(Pair {
                    producer: i,
                    consumer: j,
                });
            }
        }
    }
    let n_pairs = pairs.len();

    if n_pairs == 0 {
        // Nothing can trade: feasible only if every agent can sit at zero.
        if let Some(stuck) = agents.iter().find(|a| a.p_min > 0.0 || a.p_max < 0.0) {
            return Err(SolveError::Infeasible(format!(
                "{} cannot reach zero net injection without trading partners",
                stuck.id
            )));
        }
        let trades = TradeMatrix::zeros(instance.graph());
        let objective = total_cost(instance, &trades);
        return Ok(CentralSolution {
            trades,
            prices: BTreeMap::new(),
            mu_up: BTreeMap::new(),
            mu_down: BTreeMap::new(),
            objective,
            kkt_residual: 0.0,
            iterations: 0,
        });
    }

    // Incidence of agents onto pair variables: +1 producer, -1 consumer.
    let mut incidence = DMatrix::zeros(n_agents, n_pairs);
    for (e, pair) in pairs.iter().enumerate() {
        incidence[(pair.producer, e)] = 1.0;
        incidence[(pair.consumer, e)] = -1.0;
    }

    // 0.5 t' (G' diag(a) G) t + q' t with q from linear costs and the
    // differentiation coefficients of both directions.
    let scaled = DMatrix::from_fn(n_agents, n_pairs, |i, e| agents[i].a * incidence[(i, e)]);
    let p = incidence.transpose() * scaled;
    let q = DVector::from_fn(n_pairs, |e, _| {
        let pair = &pairs[e];
        let prod = &agents[pair.producer];
        let cons = &agents[pair.consumer];
        let c_nm = instance.coefficient(&prod.id, &cons.id);
        let c_mn = instance.coefficient(&cons.id, &prod.id);
        prod.b - cons.b + c_nm - c_mn
    });

    // Rows: t >= 0, then the injection bounds per agent. No per-pair
    // upper caps: they would duplicate the agent rows and smear the bound
    // rents over degenerate dual splits.
    let m_rows = n_pairs + n_agents;
    let mut a_mat = DMatrix::zeros(m_rows, n_pairs);
    let mut l = DVector::zeros(m_rows);
    let mut u = DVector::zeros(m_rows);
    for e in 0..n_pairs {
        a_mat[(e, e)] = 1.0;
        l[e] = 0.0;
        u[e] = f64::INFINITY;
    }
    for i in 0..n_agents {
        for e in 0..n_pairs {
            a_mat[(n_pairs + i, e)] = incidence[(i, e)];
        }
        l[n_pairs + i] = agents[i].p_min;
        u[n_pairs + i] = agents[i].p_max;
    }

    // Bound slacks scale with trade volume (~100 kWh), so the inner
    // tolerances sit three orders below the requested KKT residual.
    let settings = QpSettings {
        eps_abs: (tol * 1e-3).max(1e-13),
        eps_rel: (tol * 1e-3).max(1e-13),
        ..QpSettings::default()
    };
    let qp = QpProblem {
        p,
        q,
        a: a_mat,
        l,
        u,
    };
    let solution = solve(&qp, &settings)?;

    // Mirror the reduced solution back onto directed edges.
    let mut trades = TradeMatrix::zeros(instance.graph());
    for (e, pair) in pairs.iter().enumerate() {
        let t = solution.x[e];
        trades.set(
            agents[pair.producer].id.clone(),
            agents[pair.consumer].id.clone(),
            t,
        );
        trades.set(
            agents[pair.consumer].id.clone(),
            agents[pair.producer].id.clone(),
            -t,
        );
    }

    let mut mu_up = BTreeMap::new();
    let mut mu_down = BTreeMap::new();
    for (i, agent) in agents.iter().enumerate() {
        let y = solution.y[n_pairs + i];
        mu_up.insert(agent.id.clone(), y.max(0.0));
        mu_down.insert(agent.id.clone(), (-y).max(0.0));
    }

    // Side marginal of one directed edge; for an effective trade both
    // sides coincide and equal the trade price.
    let side = |from: &AgentId, to: &AgentId| -> f64 {
        let agent = instance.agent(from).unwrap();
        let p_n = trades.net_injection(from);
        let c = instance.coefficient(from, to);
        agent.a * p_n + agent.b + c + mu_up[from] - mu_down[from]
    };
    let mut prices = BTreeMap::new();
    for (n, m) in instance.graph().directed_edges() {
        if prices.contains_key(&(n.clone(), m.clone())) {
            continue;
        }
        let role_n = instance.agent(n).unwrap().role;
        let role_m = instance.agent(m).unwrap().role;
        let lambda = match (role_n, role_m) {
            (Role::Producer, Role::Consumer) => 0.5 * (side(n, m) + side(m, n)),
            (Role::Consumer, Role::Producer) => 0.5 * (side(n, m) + side(m, n)),
            // Zero-trade same-role edges: any price below (producers) or
            // above (consumers) both marginals satisfies optimality.
            (Role::Producer, Role::Producer) => side(n, m).min(side(m, n)),
            (Role::Consumer, Role::Consumer) => side(n, m).max(side(m, n)),
        };
        prices.insert((n.clone(), m.clone()), lambda);
        prices.insert((m.clone(), n.clone()), lambda);
    }

    let objective = total_cost(instance, &trades);
    let kkt = kkt_residual(instance, &trades, &prices, &mu_up, &mu_down)
        .expect("multipliers are clamped non-negative")
        .max();

    Ok(CentralSolution {
        trades,
        prices,
        mu_up,
        mu_down,
        objective,
        kkt_residual: kkt,
        iterations: solution.iterations,
    })
}

/// Relative optimality gap of a negotiation outcome against the
/// centralized objective. The negotiated trades are symmetrized first so
/// a reciprocity-feasible point is evaluated; the gap is absolute when the
/// centralized objective is zero.
pub fn optimality_gap(
    instance: &MarketInstance,
    rci: &ClearingResult,
    central: &CentralSolution,
) -> f64 {
    gap_against_central(instance, &rci.trades, central)
}

/// Same measurement for a bare trade matrix.
pub fn gap_against_central(
    instance: &MarketInstance,
    trades: &TradeMatrix,
    central: &CentralSolution,
) -> f64 {
    let candidate = total_cost(instance, &trades.symmetrized());
    if central.objective == 0.0 {
        candidate - central.objective
    } else {
        (candidate - central.objective) / central.objective.abs()
    }
}
