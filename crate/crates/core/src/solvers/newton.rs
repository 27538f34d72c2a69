//! Damped Newton–Krylov iteration on `I′(u) = 0`.
//!
//! The Newton system `H d = −F` is solved by GMRES on the left-preconditioned
//! operator `K⁻¹H` (K the H¹ Gram matrix), and steps are damped by
//! backtracking on the dual-norm merit `Fᵀ K⁻¹ F`. The iteration does not care
//! about the Morse index, so it serves both the minimizer and saddle points.

use crate::error::{Result, SolverError};
use crate::functional::{Functional, Problem};
use crate::grid::RadialField;
use crate::linalg::gmres;

use super::{dot, residual_norm};

pub(crate) struct NewtonOutcome {
    pub u: RadialField,
    pub iterations: usize,
}

fn merit(prob: &Problem, functional: Functional, u: &RadialField) -> (f64, Vec<f64>, Vec<f64>) {
    let f = functional.evaluate(prob, u).nodal_gradient();
    let z = u.grid().solve_gram(&f);
    (dot(&f, &z), f, z)
}

pub(crate) fn newton_polish(
    prob: &Problem,
    functional: Functional,
    start: RadialField,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome> {
    let grid = start.grid().clone();
    let mut u = start.with_dirichlet();
    let (mut m, _, mut z) = merit(prob, functional, &u);
    for it in 0..=max_iter {
        let eval = functional.evaluate(prob, &u);
        let residual = residual_norm(&eval.strong_residual());
        if residual <= tol {
            return Ok(NewtonOutcome { u, iterations: it });
        }
        if it == max_iter {
            return Err(SolverError::NonConvergence {
                stage: "Newton polish".into(),
                iterations: it,
                residual,
            });
        }
        let rhs: Vec<f64> = z.iter().map(|v| -v).collect();
        let op = |x: &[f64]| grid.solve_gram(&eval.hessian_apply(x));
        let step = gmres(op, &rhs, 80, 800, 1e-9);
        if !step.relative_residual.is_finite() || step.relative_residual > 1e-2 {
            return Err(SolverError::NonConvergence {
                stage: format!("Newton linear solve (GMRES after {} iterations)", step.iterations),
                iterations: it,
                residual,
            });
        }
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = RadialField::from_vec_unchecked(
                &grid,
                u.values().iter().zip(&step.x).map(|(a, d)| a + s * d).collect(),
            )
            .with_dirichlet();
            let (mt, _, zt) = merit(prob, functional, &trial);
            if mt.is_finite() && mt <= (1.0 - 1e-4 * s) * m {
                u = trial;
                m = mt;
                z = zt;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(SolverError::NonConvergence {
                stage: "Newton line search".into(),
                iterations: it,
                residual,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}
