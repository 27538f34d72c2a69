use crate::error::{invalid, Result, SolverError};
use crate::functional::{Functional, Problem};
use crate::grid::RadialField;

use super::{mountain_pass, mountain_pass_from_path, CriticalPoint, SolverSettings};

/// `points` equally spaced values from ½ to 1.
pub fn mu_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(invalid("mu_points", format!("need at least 2, got {points}")));
    }
    Ok((0..points)
        .map(|j| {
            if j == points - 1 {
                1.0
            } else {
                0.5 + 0.5 * j as f64 / (points - 1) as f64
            }
        })
        .collect())
}

/// Mountain-pass points of `I_{λ,μ_j}` along an increasing μ-grid ending at 1,
/// each stage warm-started from the deformed path of the previous one.
pub fn mu_continuation(
    prob: &Problem,
    mu_grid: &[f64],
    endpoint: &RadialField,
    rho: f64,
    settings: &SolverSettings,
) -> Result<Vec<CriticalPoint>> {
    if mu_grid.is_empty() {
        return Err(invalid("mu_grid", "empty"));
    }
    if mu_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("mu_grid", "must be strictly increasing"));
    }
    if mu_grid[0] < 0.5 || *mu_grid.last().expect("non-empty") != 1.0 {
        return Err(invalid("mu_grid", "must lie in [1/2, 1] and end at 1"));
    }
    let mut out = Vec::with_capacity(mu_grid.len());
    let mut path: Option<Vec<RadialField>> = None;
    for (stage, &mu) in mu_grid.iter().enumerate() {
        let wrap = |e: SolverError| SolverError::ContinuationStage {
            stage,
            mu,
            source: Box::new(e),
        };
        let functional = Functional::mu(mu).map_err(wrap)?;
        let result = match path.take() {
            None => mountain_pass(prob, functional, endpoint, rho, settings),
            Some(nodes) => mountain_pass_from_path(prob, functional, nodes, rho, settings),
        }
        .map_err(wrap)?;
        path = Some(result.path.nodes);
        out.push(result.point);
    }
    Ok(out)
}
