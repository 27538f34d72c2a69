use serde::Serialize;

use crate::error::{invalid, Result, SolverError};
use crate::functional::{geometry_constants, CutoffSpec, Functional, GeometryConstants, Problem};
use crate::sobolev::{sobolev_constant, SobolevSettings};

use super::{
    find_endpoint, local_minimizer, mountain_pass, mu_continuation, mu_grid, CriticalPoint,
    EndpointMode, SolverSettings,
};

/// Data of the cut-off route used for `p ≤ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffRoute {
    /// Truncation radius of the trial run.
    pub trial_radius: f64,
    pub trial: CriticalPoint,
    pub m0: f64,
    /// `M₀⁻³`; the route is valid only for λ below it.
    pub gate: f64,
    pub gate_ok: bool,
    /// `‖u₁‖ ≤ M₀`, i.e. u₁ sits on the plateau of η and solves the full system.
    pub within_plateau: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum Route {
    Continuation {
        mu_grid: Vec<f64>,
        stages: Vec<CriticalPoint>,
    },
    Cutoff(CutoffRoute),
}

/// Everything computed by [`solve_two_solutions_with`], certified or not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutcome {
    pub geometry: GeometryConstants,
    pub u0: CriticalPoint,
    pub u1: CriticalPoint,
    pub route: Route,
}

impl SolveOutcome {
    /// Checks the conditions under which `(u₀, u₁)` is a certified pair of
    /// solutions: the λ-gate and plateau condition of the cut-off route and
    /// the sign pattern `I(u₀) < 0 < I(u₁)`.
    pub fn certify(&self, prob: &Problem) -> Result<()> {
        if let Route::Cutoff(c) = &self.route {
            if !c.gate_ok {
                return Err(SolverError::LambdaGate {
                    lambda: prob.lambda(),
                    m0: c.m0,
                    gate: c.gate,
                });
            }
            if !c.within_plateau {
                return Err(SolverError::CutoffNotCertified {
                    norm: self.u1.norm,
                    m0: c.m0,
                    lambda: prob.lambda(),
                    gate: c.gate,
                });
            }
        }
        if !(self.u0.energy < 0.0 && self.u1.energy > 0.0) {
            return Err(SolverError::EnergyOrdering {
                e0: self.u0.energy,
                e1: self.u1.energy,
            });
        }
        Ok(())
    }

    pub fn is_certified(&self, prob: &Problem) -> bool {
        self.certify(prob).is_ok()
    }
}

/// `S`, `C_p`, α and ρ for the problem's exponent, grid and source.
pub fn problem_geometry(prob: &Problem, seed: u64) -> Result<GeometryConstants> {
    let settings = SobolevSettings {
        seed,
        ..SobolevSettings::default()
    };
    let s = sobolev_constant(prob.p(), prob.grid(), &settings)?;
    geometry_constants(prob.p(), s.value, prob.g_l2())
}

/// The negative-energy minimizer and the positive-energy mountain-pass
/// solution. Fails with the first violated hypothesis or certificate.
pub fn solve_two_solutions(
    prob: &Problem,
    settings: &SolverSettings,
) -> Result<(CriticalPoint, CriticalPoint)> {
    prob.check_source()?;
    let geo = problem_geometry(prob, settings.seed)?;
    let outcome = solve_two_solutions_with(prob, &geo, settings)?;
    outcome.certify(prob)?;
    Ok((outcome.u0, outcome.u1))
}

/// Runs both solvers with precomputed geometry and returns what was found
/// without applying the certificates (see [`SolveOutcome::certify`]).
pub fn solve_two_solutions_with(
    prob: &Problem,
    geo: &GeometryConstants,
    settings: &SolverSettings,
) -> Result<SolveOutcome> {
    prob.check_source()?;
    if !geo.g3_holds {
        return Err(SolverError::Hypothesis {
            hypothesis: "(G3)",
            detail: format!("|g|₂ = {:.6e} is not below C_p = {:.6e}", geo.g_l2, geo.c_p),
        });
    }
    let u0 = local_minimizer(prob, geo, settings)?;

    if prob.p() > 2.0 {
        let grid = mu_grid(settings.mu_points)?;
        let endpoint = find_endpoint(prob, grid[0], EndpointMode::Scaling, geo.alpha)?;
        let stages = mu_continuation(prob, &grid, &endpoint, geo.rho, settings)?;
        let last = stages.last().expect("non-empty μ-grid");
        let mut u1 = CriticalPoint::new(prob, Functional::Full, last.u.clone(), last.kind);
        u1.level_estimate = last.level_estimate;
        u1.iterations = stages.iter().map(|s| s.iterations).sum();
        u1.newton_iterations = stages.iter().map(|s| s.newton_iterations).sum();
        u1.history = stages.iter().map(|s| s.level_estimate).collect();
        return Ok(SolveOutcome {
            geometry: *geo,
            u0,
            u1,
            route: Route::Continuation {
                mu_grid: grid,
                stages,
            },
        });
    }

    let trial_radius = settings.trial_radius_factor * geo.alpha;
    let trial_cut = CutoffSpec::new(trial_radius)?;
    let e = find_endpoint(prob, 1.0, EndpointMode::CutoffRay(trial_cut), geo.alpha)?;
    let trial = mountain_pass(prob, Functional::Cutoff(trial_cut), &e, geo.rho, settings)?.point;

    let m0 = match settings.cutoff_m0 {
        Some(m) => m,
        None => settings.m0_factor * trial.norm,
    };
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(invalid("cutoff_m0", format!("must be positive, got {m0}")));
    }
    let cut = CutoffSpec::new(m0)?;
    let e0 = find_endpoint(prob, 1.0, EndpointMode::CutoffRay(cut), geo.alpha)?;
    let u1 = mountain_pass(prob, Functional::Cutoff(cut), &e0, geo.rho, settings)?.point;
    let gate = m0.powi(-3);
    let route = CutoffRoute {
        trial_radius,
        trial,
        m0,
        gate,
        gate_ok: prob.lambda() < gate,
        within_plateau: u1.norm <= m0,
    };
    Ok(SolveOutcome {
        geometry: *geo,
        u0,
        u1,
        route: Route::Cutoff(route),
    })
}
