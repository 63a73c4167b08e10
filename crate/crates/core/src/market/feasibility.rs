//! Primal feasibility checking for candidate dispatches.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::market::agent::{AgentId, Role};
use crate::market::instance::MarketInstance;
use crate::market::trades::TradeMatrix;

/// One constraint violation found in a candidate dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// Net injection outside `[p_min, p_max]` by `amount`.
    Bound { agent: AgentId, amount: f64 },
    /// `|P_nm + P_mn|` above tolerance.
    Reciprocity {
        from: AgentId,
        to: AgentId,
        amount: f64,
    },
    /// Trade on the wrong side of zero for the agent's role.
    Sign {
        from: AgentId,
        to: AgentId,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Bound { agent, amount } => {
                write!(f, "{agent}: injection bound violated by {amount:.6}")
            }
            Violation::Reciprocity { from, to, amount } => {
                write!(f, "{from}<->{to}: reciprocity violated by {amount:.6}")
            }
            Violation::Sign { from, to, value } => {
                write!(f, "{from}->{to}: trade {value:.6} violates role sign")
            }
        }
    }
}

/// All violations of a candidate dispatch; empty iff feasible.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest violation magnitude, 0 when feasible.
    pub fn worst(&self) -> f64 {
        self.violations
            .iter()
            .map(|v| match v {
                Violation::Bound { amount, .. } | Violation::Reciprocity { amount, .. } => *amount,
                Violation::Sign { value, .. } => value.abs(),
            })
            .fold(0.0, f64::max)
    }
}

/// Lists every bound, reciprocity and sign violation of `trades` beyond
/// `tol`. An empty report means the point satisfies all dispatch
/// constraints at that tolerance.
pub fn check_feasibility(
    instance: &MarketInstance,
    trades: &TradeMatrix,
    tol: f64,
) -> FeasibilityReport {
    let mut violations = Vec::new();

    for agent in instance.agents() {
        let p_n = trades.net_injection(&agent.id);
        let excess = (p_n - agent.p_max).max(agent.p_min - p_n);
        if excess > tol {
            violations.push(Violation::Bound {
                agent: agent.id.clone(),
                amount: excess,
            });
        }
        for m in instance.graph().neighbors(&agent.id) {
            let p_nm = trades.get(&agent.id, m);
            let bad_sign = match agent.role {
                Role::Producer => p_nm < -tol,
                Role::Consumer => p_nm > tol,
            };
            if bad_sign {
                violations.push(Violation::Sign {
                    from: agent.id.clone(),
                    to: m.clone(),
                    value: p_nm,
                });
            }
            // Each unordered pair reported once.
            if agent.id < *m {
                let gap = (p_nm + trades.get(m, &agent.id)).abs();
                if gap > tol {
                    violations.push(Violation::Reciprocity {
                        from: agent.id.clone(),
                        to: m.clone(),
                        amount: gap,
                    });
                }
            }
        }
    }

    FeasibilityReport { violations }
}
