use crate::error::{invalid, Result, SolverError};
use crate::functional::{CutoffSpec, Functional, Problem};
use crate::grid::{h1_norm, scale_transform, RadialField};

/// How the far end of the mountain-pass path is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointMode {
    /// `w_t = t² w(t·)` with `w = e^{−r/2}`, `t` increased until the
    /// μ-functional is negative for every μ ≥ `mu_min` (needs p > 2).
    Scaling,
    /// `t·v₁` along the unit Gaussian profile, `t ≥ 2M`, for the cut-off
    /// functional.
    CutoffRay(CutoffSpec),
}

const MAX_STEPS: usize = 200;

/// A field with negative energy and H¹ norm above `min_norm` (normally the
/// ring radius α, so that every path from 0 crosses the ring).
///
/// Since `I_{λ,μ}` decreases in μ, negativity at `mu_min` covers the whole
/// range `[mu_min, 1]`.
pub fn find_endpoint(
    prob: &Problem,
    mu_min: f64,
    mode: EndpointMode,
    min_norm: f64,
) -> Result<RadialField> {
    let grid = prob.grid();
    match mode {
        EndpointMode::Scaling => {
            if prob.p() <= 2.0 {
                return Err(invalid(
                    "p",
                    format!("scaling endpoint needs p > 2, got {}", prob.p()),
                ));
            }
            let functional = Functional::mu(mu_min)?;
            let w = grid.sample(|r| (-0.5 * r).exp()).with_dirichlet();
            let mut t = 1.0;
            for _ in 0..MAX_STEPS {
                let wt = scale_transform(&w, t)?.with_dirichlet();
                if functional.total(prob, &wt) < 0.0 && h1_norm(&wt) > min_norm {
                    return Ok(wt);
                }
                t *= 1.25;
                if t * grid.spacing() > 0.5 {
                    // profile narrower than a few cells: stop before it is unresolved
                    break;
                }
            }
            Err(SolverError::EndpointNotFound { t_max: t })
        }
        EndpointMode::CutoffRay(cut) => {
            let v = grid.sample(|r| (-0.5 * r * r).exp()).with_dirichlet();
            let v1 = v.scaled(1.0 / h1_norm(&v));
            let functional = Functional::Cutoff(cut);
            let mut t = 2.0 * cut.radius().max(min_norm);
            for _ in 0..MAX_STEPS {
                let e = v1.scaled(t);
                if functional.total(prob, &e) < 0.0 {
                    return Ok(e);
                }
                t *= 2.0;
            }
            Err(SolverError::EndpointNotFound { t_max: t })
        }
    }
}
