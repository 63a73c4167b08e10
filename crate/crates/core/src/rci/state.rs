//! Per-agent private iterates.

use serde::{Deserialize, Serialize};

use crate::market::Role;

/// One agent's private negotiation state: its trades and price estimates
/// over its neighborhood (aligned with the agent's ordered neighbor list)
/// and its two bound multipliers.
///
/// Multipliers stay non-negative and trades stay on the role's side of
/// zero at every iteration — the updates project both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalState {
    /// Trades `P_nm` per neighbor, kWh per step.
    pub trades: Vec<f64>,
    /// Price estimates `lambda_nm` per neighbor, c€/kWh.
    pub prices: Vec<f64>,
    /// Upper-bound multiplier, c€/kWh.
    pub mu_up: f64,
    /// Lower-bound multiplier, c€/kWh.
    pub mu_down: f64,
    /// Completed iterations.
    pub k: u64,
}

impl LocalState {
    /// Cold-start state: zero trades, prices and multipliers.
    pub fn cold(neighbor_count: usize) -> Self {
        LocalState {
            trades: vec![0.0; neighbor_count],
            prices: vec![0.0; neighbor_count],
            mu_up: 0.0,
            mu_down: 0.0,
            k: 0,
        }
    }

    pub fn net_injection(&self) -> f64 {
        self.trades.iter().sum()
    }

    /// Checks the state invariants for an agent of the given role with the
    /// given neighborhood size. Used to vet warm starts.
    pub fn is_consistent(&self, role: Role, neighbor_count: usize) -> bool {
        self.trades.len() == neighbor_count
            && self.prices.len() == neighbor_count
            && self.mu_up >= 0.0
            && self.mu_down >= 0.0
            && self.trades.iter().all(|p| match role {
                Role::Producer => *p >= 0.0,
                Role::Consumer => *p <= 0.0,
            })
            && self
                .trades
                .iter()
                .chain(self.prices.iter())
                .all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cold_state_is_consistent_for_both_roles() {
        let s = LocalState::cold(3);
        assert!(s.is_consistent(Role::Producer, 3));
        assert!(s.is_consistent(Role::Consumer, 3));
        assert_eq!(s.net_injection(), 0.0);
    }

    #[test]
    fn sign_violation_detected() {
        let mut s = LocalState::cold(2);
        s.trades[1] = -0.5;
        assert!(!s.is_consistent(Role::Producer, 2));
        assert!(s.is_consistent(Role::Consumer, 2));
    }
}
