use crate::error::{Result, SolverError};
use crate::functional::{Functional, GeometryConstants, Problem};
use crate::grid::RadialField;

use super::{dot, newton_polish, residual_norm, CriticalPoint, PointKind, SolverSettings};

/// Radial projection onto the ball `‖u‖ ≤ radius`.
fn project(u: Vec<f64>, norm_sq: f64, radius: f64) -> Vec<f64> {
    let norm = norm_sq.sqrt();
    if norm <= radius {
        u
    } else {
        u.into_iter().map(|v| v * radius / norm).collect()
    }
}

/// One projected Armijo step along the Sobolev gradient. Returns the new
/// iterate, its energy and the accepted step length.
pub(crate) fn projected_step(
    prob: &Problem,
    u: &RadialField,
    energy: f64,
    grad: &[f64],
    mut step: f64,
    radius: f64,
) -> Option<(RadialField, f64, f64)> {
    let grid = u.grid();
    let dir = grid.solve_gram(grad);
    for _ in 0..60 {
        let raw: Vec<f64> = u.values().iter().zip(&dir).map(|(a, d)| a - step * d).collect();
        let mut ku = vec![0.0; raw.len()];
        grid.apply_gram(&raw, &mut ku);
        let norm_sq = dot(&ku, &raw);
        let trial = RadialField::from_vec_unchecked(grid, project(raw, norm_sq, radius));
        let e = Functional::Full.total(prob, &trial);
        let moved: Vec<f64> = trial.values().iter().zip(u.values()).map(|(a, b)| a - b).collect();
        if e.is_finite() && e <= energy + 1e-4 * dot(grad, &moved) && e <= energy {
            return Some((trial, e, step));
        }
        step *= 0.5;
    }
    None
}

/// Minimizes `I_λ` over the ball `‖u‖ ≤ α` by projected Sobolev-gradient
/// descent with an Armijo line search, starting from `u = 0`.
///
/// The energies of the accepted iterates are kept in `history`; the line
/// search makes that sequence nonincreasing. If the descent budget runs out
/// close to convergence, a Newton polish finishes the job provided it lowers
/// the energy and stays inside the ball.
pub fn local_minimizer(
    prob: &Problem,
    geo: &GeometryConstants,
    settings: &SolverSettings,
) -> Result<CriticalPoint> {
    let grid = prob.grid().clone();
    let f = Functional::Full;
    let mut u = grid.zeros();
    let mut energy = 0.0;
    let mut history = vec![energy];
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    let mut residual;

    loop {
        let eval = f.evaluate(prob, &u);
        residual = residual_norm(&eval.strong_residual());
        if residual <= settings.tol_grad || iterations >= settings.max_iter {
            break;
        }
        let grad = eval.nodal_gradient();
        drop(eval);
        let Some((trial, e, s)) = projected_step(prob, &u, energy, &grad, step, geo.alpha) else {
            break;
        };
        step = s;
        u = trial;
        energy = e;
        history.push(energy);
        iterations += 1;
        step = (2.0 * step).min(4.0);
    }

    let mut newton_iterations = 0;
    if residual > settings.tol_grad {
        let outcome = newton_polish(prob, f, u.clone(), settings.tol_grad, settings.newton_max_iter)
            .map_err(|_| SolverError::NonConvergence {
                stage: "local minimizer".into(),
                iterations,
                residual,
            })?;
        let polished = CriticalPoint::new(prob, f, outcome.u, PointKind::Minimizer);
        if polished.energy > energy + 1e-10 * energy.abs().max(1.0) || polished.norm > geo.alpha {
            return Err(SolverError::NonConvergence {
                stage: "local minimizer".into(),
                iterations,
                residual,
            });
        }
        u = polished.u;
        newton_iterations = outcome.iterations;
        history.push(polished.energy);
    }

    let mut point = CriticalPoint::new(prob, f, u, PointKind::Minimizer);
    point.iterations = iterations;
    point.newton_iterations = newton_iterations;
    point.history = history;
    if point.norm >= geo.alpha * (1.0 - 1e-9) {
        return Err(SolverError::PinnedToBoundary {
            norm: point.norm,
            alpha: geo.alpha,
        });
    }
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_inner, RadialGrid};
    use crate::sampling::{source_field, SourceFamily};

    #[test]
    fn first_step_from_zero_moves_along_the_source() {
        let grid = RadialGrid::new(20.0, 512).unwrap();
        let g = source_field(&grid, SourceFamily::Exponential, 1.0).unwrap();
        let prob = Problem::new(1.0, 3.0, g.clone()).unwrap();
        let zero = grid.zeros();
        let grad = Functional::Full.evaluate(&prob, &zero).nodal_gradient();
        let (u1, e1, _) = projected_step(&prob, &zero, 0.0, &grad, 1.0, 7.0).unwrap();
        assert!(l2_inner(&u1, &g).unwrap() > 0.0);
        assert!(e1 < 0.0);
    }
}
