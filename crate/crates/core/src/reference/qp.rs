//! Dense ADMM solver for small convex quadratic programs of the form
//!
//! ```text
//!   minimize   0.5 x' P x + q' x
//!   subject to l <= A x <= u
//! ```
//!
//! Operator-splitting iteration with a prefactorized KKT system and
//! residual-balancing step-size adaptation. `P` only needs to be positive
//! semidefinite: the `sigma` regularization keeps the linear system
//! nonsingular, which matters here because the dispatch objective is flat
//! along trade reroutings that preserve net injections.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::SolveError;

#[derive(Debug, Clone)]
pub struct QpProblem {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub a: DMatrix<f64>,
    pub l: DVector<f64>,
    pub u: DVector<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct QpSettings {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iterations: u64,
    pub rho: f64,
    pub sigma: f64,
    /// Over-relaxation factor in (1, 2).
    pub alpha: f64,
}

impl Default for QpSettings {
    fn default() -> Self {
        QpSettings {
            eps_abs: 1e-10,
            eps_rel: 1e-10,
            max_iterations: 400_000,
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Multipliers of `l <= A x <= u`: positive rows push against the
    /// upper bound, negative rows against the lower bound.
    pub y: DVector<f64>,
    pub iterations: u64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn solve(problem: &QpProblem, settings: &QpSettings) -> Result<QpSolution, SolveError> {
    let n = problem.p.nrows();
    let m = problem.a.nrows();
    assert_eq!(problem.p.ncols(), n);
    assert_eq!(problem.q.len(), n);
    assert_eq!(problem.a.ncols(), n);
    assert_eq!(problem.l.len(), m);
    assert_eq!(problem.u.len(), m);

    if n == 0 {
        return Ok(QpSolution {
            x: DVector::zeros(0),
            y: DVector::zeros(m),
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
        });
    }

    let ata = problem.a.transpose() * &problem.a;
    let factor = |rho: f64| -> Cholesky<f64, nalgebra::Dyn> {
        let mut k = problem.p.clone();
        k += DMatrix::identity(n, n) * settings.sigma;
        k += &ata * rho;
        Cholesky::new(k).expect("regularized KKT matrix is positive definite")
    };

    let mut rho = settings.rho;
    let mut chol = factor(rho);

    let mut x = DVector::zeros(n);
    let mut z = DVector::zeros(m);
    let mut y = DVector::zeros(m);

    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        iterations += 1;

        // x-update: (P + sigma I + rho A'A) x~ = sigma x - q + A'(rho z - y)
        let rhs = &x * settings.sigma - &problem.q + problem.a.transpose() * (&z * rho - &y);
        let x_tilde = chol.solve(&rhs);
        let ax_tilde = &problem.a * &x_tilde;

        // Over-relaxed commit, z projected onto [l, u].
        x = &x_tilde * settings.alpha + &x * (1.0 - settings.alpha);
        let ax_mix = &ax_tilde * settings.alpha + &z * (1.0 - settings.alpha);
        let mut z_next = &ax_mix + &y / rho;
        for i in 0..m {
            z_next[i] = z_next[i].clamp(problem.l[i], problem.u[i]);
        }
        y += (&ax_mix - &z_next) * rho;
        z = z_next;

        if iterations % 25 == 0 || iterations == settings.max_iterations {
            let ax = &problem.a * &x;
            let r_prim = &ax - &z;
            let r_dual = &problem.p * &x + &problem.q + problem.a.transpose() * &y;
            primal = inf_norm(&r_prim);
            dual = inf_norm(&r_dual);

            let scale_prim = inf_norm(&ax).max(inf_norm(&z)).max(1.0);
            let scale_dual = inf_norm(&(&problem.p * &x))
                .max(inf_norm(&problem.q))
                .max(inf_norm(&(problem.a.transpose() * &y)))
                .max(1.0);
            let tol_prim = settings.eps_abs + settings.eps_rel * scale_prim;
            let tol_dual = settings.eps_abs + settings.eps_rel * scale_dual;
            if primal <= tol_prim && dual <= tol_dual {
                return Ok(QpSolution {
                    x,
                    y,
                    iterations,
                    primal_residual: primal,
                    dual_residual: dual,
                });
            }

            // Residual balancing keeps the two residuals decaying together.
            if iterations % 100 == 0 {
                let ratio = ((primal / tol_prim) / (dual / tol_dual)).sqrt();
                if ratio.is_finite() && !(0.2..=5.0).contains(&ratio) {
                    rho = (rho * ratio).clamp(1e-6, 1e6);
                    chol = factor(rho);
                }
            }
        }
    }

    Err(SolveError::MaxIterations {
        iterations,
        primal,
        dual,
    })
}
