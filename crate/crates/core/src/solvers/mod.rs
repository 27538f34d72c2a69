//! Critical points of the energy: the local minimizer near the origin, the
//! mountain-pass solution, endpoint constructions and the μ-continuation.

mod continuation;
mod endpoint;
mod minimizer;
mod mountain_pass;
mod newton;
mod two_solutions;

use serde::Serialize;

use crate::functional::{Functional, Problem};
use crate::grid::{lp_norm, RadialField};

pub use continuation::{mu_continuation, mu_grid};
pub use endpoint::{find_endpoint, EndpointMode};
pub use minimizer::local_minimizer;
pub use mountain_pass::{mountain_pass, MountainPassPath, MountainPassResult};
pub use two_solutions::{
    problem_geometry, solve_two_solutions, solve_two_solutions_with, CutoffRoute, Route,
    SolveOutcome,
};

pub(crate) use mountain_pass::mountain_pass_from_path;
pub(crate) use newton::newton_polish;

/// Knobs shared by all solvers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSettings {
    /// Target L² norm of the strong-form residual.
    pub tol_grad: f64,
    /// Iteration budget of the descent and path-deformation loops.
    pub max_iter: usize,
    pub path_nodes: usize,
    pub mu_points: usize,
    pub seed: u64,
    /// Fixed truncation radius M₀ for the cut-off route; derived from a trial
    /// run when absent.
    pub cutoff_m0: Option<f64>,
    /// M₀ = `m0_factor · ‖u₁‖` of the trial run.
    pub m0_factor: f64,
    /// Trial cut-off radius in units of α.
    pub trial_radius_factor: f64,
    /// Residual at which descent hands over to Newton, relative to `1 + ‖u‖`.
    pub newton_switch: f64,
    pub newton_max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol_grad: 1e-6,
            max_iter: 20_000,
            path_nodes: 41,
            mu_points: 11,
            seed: 0,
            cutoff_m0: None,
            m0_factor: 4.0,
            trial_radius_factor: 4.0,
            newton_switch: 1e-2,
            newton_max_iter: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Minimizer,
    MountainPass,
}

/// A converged critical point of one member of the functional family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    #[serde(skip)]
    pub u: RadialField,
    pub functional: Functional,
    /// Value of the functional the point is critical for.
    pub energy: f64,
    /// L² norm of the strong-form residual.
    pub grad_residual: f64,
    pub norm: f64,
    pub kind: PointKind,
    /// Final path maximum for mountain-pass points; the energy otherwise.
    pub level_estimate: f64,
    pub iterations: usize,
    pub newton_iterations: usize,
    /// Energies of the accepted descent iterates (minimizer) or path maxima
    /// (mountain pass).
    #[serde(skip)]
    pub history: Vec<f64>,
}

impl CriticalPoint {
    pub(crate) fn new(
        prob: &Problem,
        functional: Functional,
        u: RadialField,
        kind: PointKind,
    ) -> Self {
        let eval = functional.evaluate(prob, &u);
        let energy = eval.total();
        let norm = eval.norm_sq().sqrt();
        let grad_residual = residual_norm(&eval.strong_residual());
        Self {
            u,
            functional,
            energy,
            grad_residual,
            norm,
            kind,
            level_estimate: energy,
            iterations: 0,
            newton_iterations: 0,
            history: Vec::new(),
        }
    }
}

pub(crate) fn residual_norm(res: &RadialField) -> f64 {
    lp_norm(res, 2.0).expect("q = 2 is admissible")
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
