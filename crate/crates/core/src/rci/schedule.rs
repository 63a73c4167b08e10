//! Tuning-factor schedules and stopping criteria for the negotiation.

use serde::{Deserialize, Serialize};

/// A positive sequence `scale / k^exponent`, defined for k >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSequence {
    pub scale: f64,
    pub exponent: f64,
}

impl PowerSequence {
    pub fn new(scale: f64, exponent: f64) -> Self {
        assert!(scale > 0.0, "sequence scale must be positive");
        assert!(exponent >= 0.0, "sequence exponent must be non-negative");
        PowerSequence { scale, exponent }
    }

    /// A constant sequence.
    pub fn constant(scale: f64) -> Self {
        PowerSequence::new(scale, 0.0)
    }

    pub fn value(&self, k: u64) -> f64 {
        debug_assert!(k >= 1, "schedules are defined for k >= 1");
        if self.exponent == 0.0 {
            self.scale
        } else {
            self.scale / (k as f64).powf(self.exponent)
        }
    }
}

/// The four tuning sequences of one negotiation: price innovation (alpha),
/// price consensus (beta), bound-multiplier step (eta), and the floor of
/// the trade distribution factors (delta).
///
/// Slowly decaying alpha and beta keep convergence speed while staying
/// resilient to setup changes; the defaults are the values tuned on the
/// bundled two-bus case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningSchedule {
    pub alpha: PowerSequence,
    pub beta: PowerSequence,
    pub eta: PowerSequence,
    pub delta: PowerSequence,
}

impl Default for TuningSchedule {
    fn default() -> Self {
        TuningSchedule {
            alpha: PowerSequence::new(0.01, 0.01),
            beta: PowerSequence::new(0.1, 0.1),
            eta: PowerSequence::constant(0.005),
            delta: PowerSequence::constant(1.0),
        }
    }
}

/// Termination thresholds on the change between consecutive iterates.
///
/// The negotiation stops once the largest price change is below
/// `eps_lambda`, the largest trade change below `eps_p`, and — when
/// `check_mu` is set — the largest multiplier change below `eps_mu`.
/// The multiplier condition is optional; it tightens monitoring of the
/// bound constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingCriteria {
    pub eps_lambda: f64,
    pub eps_p: f64,
    pub eps_mu: f64,
    pub check_mu: bool,
    pub max_iterations: u64,
}

impl Default for StoppingCriteria {
    fn default() -> Self {
        StoppingCriteria {
            eps_lambda: 0.001,
            eps_p: 0.01,
            eps_mu: 0.0001,
            check_mu: true,
            max_iterations: 50_000,
        }
    }
}

impl StoppingCriteria {
    pub fn validate(&self) {
        assert!(self.eps_lambda > 0.0, "eps_lambda must be positive");
        assert!(self.eps_p > 0.0, "eps_p must be positive");
        assert!(self.eps_mu > 0.0, "eps_mu must be positive");
        assert!(self.max_iterations >= 1, "need at least one iteration");
    }
}
