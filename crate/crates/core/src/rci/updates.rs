//! The three per-iteration update rules and their helpers.

use crate::error::ValidationError;
use crate::market::{AgentSpec, Role};

/// Price update for one directed edge: a consensus step toward the
/// partner's estimate plus an innovation step that penalizes the
/// reciprocity gap,
/// `lambda' = lambda_nm - beta (lambda_nm - lambda_mn) - alpha (P_nm + P_mn)`.
///
/// `lambda_mn` and `p_mn` are the partner's values received at the end of
/// the previous round.
pub fn lambda_update(
    lambda_nm: f64,
    lambda_mn: f64,
    p_nm: f64,
    p_mn: f64,
    alpha: f64,
    beta: f64,
) -> f64 {
    debug_assert!(alpha > 0.0 && beta > 0.0);
    lambda_nm - beta * (lambda_nm - lambda_mn) - alpha * (p_nm + p_mn)
}

/// Multiplier ascent on the injection bounds with clipping at zero:
/// `mu_up' = max(0, mu_up + eta (P_n - p_max))`,
/// `mu_down' = max(0, mu_down + eta (p_min - P_n))`.
pub fn mu_update(
    mu_up: f64,
    mu_down: f64,
    p_n: f64,
    p_min: f64,
    p_max: f64,
    eta: f64,
) -> (f64, f64) {
    debug_assert!(eta > 0.0);
    (
        (mu_up + eta * (p_n - p_max)).max(0.0),
        (mu_down + eta * (p_min - p_n)).max(0.0),
    )
}

/// Inverse-gradient target set-point for one negotiated trade:
/// `(lambda_hat - mu_up + mu_down - b) / a`.
pub fn target_setpoint(agent: &AgentSpec, lambda_hat: f64, mu_up: f64, mu_down: f64) -> f64 {
    assert!(
        agent.a > 0.0,
        "agent {}: cost gradient must be bijective (a > 0)",
        agent.id
    );
    (lambda_hat - mu_up + mu_down - agent.b) / agent.a
}

/// Distribution factors `f_nm = (|P_nm| + delta) / sum_l (|P_nl| + delta)`:
/// positive, summing to one, and asymptotically proportional to the traded
/// quantities.
pub fn distribution_factors(trades: &[f64], delta: f64) -> Result<Vec<f64>, ValidationError> {
    debug_assert!(delta > 0.0);
    if trades.is_empty() {
        return Err(ValidationError::EmptyNeighborhood);
    }
    let total: f64 = trades.iter().map(|p| p.abs() + delta).sum();
    Ok(trades.iter().map(|p| (p.abs() + delta) / total).collect())
}

/// Trade update: a damped step toward the target set-point, projected onto
/// the role's sign constraint (`max` for producers, `min` for consumers).
pub fn p_update(role: Role, p_nm: f64, f_nm: f64, target: f64, p_n: f64) -> f64 {
    debug_assert!(f_nm > 0.0 && f_nm <= 1.0);
    let stepped = p_nm + f_nm * (target - p_n);
    match role {
        Role::Producer => stepped.max(0.0),
        Role::Consumer => stepped.min(0.0),
    }
}
