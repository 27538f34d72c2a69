//! Radial solver for the nonhomogeneous Schrödinger–Maxwell system
//!
//! ```text
//! −Δu + u + λφu = |u|^{p−1}u + g,   −Δφ = u²   in ℝ³,
//! ```
//!
//! restricted to radial functions. The crate evaluates the energy
//! `I_λ(u) = ½‖u‖² + (λ/4)∫φ_u u² − (1/(p+1))∫|u|^{p+1} − ∫gu` and its
//! variants, computes the negative-energy local minimizer and the
//! positive-energy mountain-pass solution, and checks the integral identities
//! those solutions satisfy.

pub mod diagnostics;
pub mod error;
pub mod functional;
pub mod grid;
mod linalg;
pub mod poisson;
pub mod sampling;
pub mod sobolev;
pub mod solvers;

pub use error::{Result, SolverError};
pub use functional::{
    cutoff_eta, cutoff_eta_prime, energy, energy_cutoff, energy_mu, geometry_constants, gradient,
    gradient_cutoff, gradient_mu, CutoffSpec, EnergyBreakdown, Functional, GeometryConstants,
    Problem,
};
pub use grid::{
    gradient_sq, h1_inner, h1_norm, h1_norm_sq, integrate3d, l2_inner, lp_norm, lp_power,
    scale_transform, RadialField, RadialGrid,
};
pub use poisson::{newtonian_potential, nonlocal_energy, PotentialField};
pub use sobolev::{sobolev_constant, sobolev_quotient, SobolevEstimate, SobolevSettings};
pub use sampling::{random_smooth_field, source_field, SourceFamily};
pub use solvers::{
    find_endpoint, local_minimizer, mountain_pass, mu_continuation, mu_grid, problem_geometry,
    solve_two_solutions, solve_two_solutions_with, CriticalPoint, CutoffRoute, EndpointMode,
    MountainPassPath, MountainPassResult, PointKind, Route, SolveOutcome, SolverSettings,
};
pub use diagnostics::{
    decomposition_check, energy_bound_chain, identity_report, nehari_residual, nonexistence_scan,
    pohozaev_residual, pohozaev_sides, ruiz_gap, EnergyBoundChain, IdentityReport,
    IdentityTolerances, ScanEntry, ScanSummary,
};
