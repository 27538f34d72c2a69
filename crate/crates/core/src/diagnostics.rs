//! Integral identities satisfied by solutions, the universal Coulomb/cubic
//! inequality, and the λ-scan of the nonexistence regime.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::functional::{Functional, GeometryConstants, Problem};
use crate::grid::{lp_power, RadialField};
use crate::solvers::{solve_two_solutions_with, CriticalPoint, Route, SolverSettings};

/// Tolerances for the pass/fail flags of an [`IdentityReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityTolerances {
    /// Relative Pohozaev residual, `|L − R| / (|L| + |R|)`.
    pub pohozaev: f64,
    /// Nehari and decomposition residuals relative to `‖u‖²`.
    pub nehari: f64,
    /// Lower bound on the Ruiz gap.
    pub ruiz: f64,
}

impl Default for IdentityTolerances {
    fn default() -> Self {
        Self {
            pohozaev: 1e-3,
            nehari: 1e-4,
            ruiz: -1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub pohozaev_residual: f64,
    pub pohozaev_relative: f64,
    pub nehari_residual: f64,
    pub decomposition_residual: f64,
    pub ruiz_gap: f64,
    pub pohozaev_ok: bool,
    pub nehari_ok: bool,
    pub decomposition_ok: bool,
    pub ruiz_ok: bool,
}

impl IdentityReport {
    pub fn all_ok(&self) -> bool {
        self.pohozaev_ok && self.nehari_ok && self.decomposition_ok && self.ruiz_ok
    }
}

/// `r g′(r)` by central differences, with `g′(0) = 0` and a one-sided
/// difference at `r_max`.
fn radial_derivative_times_r(g: &RadialField) -> Vec<f64> {
    let grid = g.grid();
    let h = grid.spacing();
    let r = grid.nodes();
    let v = g.values();
    let n = v.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                0.0
            } else if i == n - 1 {
                r[i] * (v[i] - v[i - 1]) / h
            } else {
                r[i] * (v[i + 1] - v[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Left and right sides of the Pohozaev identity
///
/// ```text
/// ∫ ½|∇u|² + (3/2)u² + (5/4)λφ_u u²  =  ∫ (3μ/(p+1))|u|^{p+1} + (3g + r g′)u.
/// ```
pub fn pohozaev_sides(prob: &Problem, mu: f64, u: &RadialField) -> Result<(f64, f64)> {
    let b = Functional::mu(mu)?.energy(prob, u)?;
    let grid = u.grid();
    let grad_sq = grid.dirichlet_form(u.values(), u.values());
    let l2 = grid.mass_form(u.values(), u.values());
    let lhs = 0.5 * grad_sq + 1.5 * l2 + 1.25 * prob.lambda() * b.nonlocal_part;
    let rg = radial_derivative_times_r(prob.source());
    let weight: Vec<f64> = prob
        .source()
        .values()
        .iter()
        .zip(&rg)
        .map(|(g, d)| 3.0 * g + d)
        .collect();
    let rhs = 3.0 * mu / (prob.p() + 1.0) * b.power_part + grid.mass_form(&weight, u.values());
    Ok((lhs, rhs))
}

/// LHS − RHS of the Pohozaev identity.
pub fn pohozaev_residual(prob: &Problem, mu: f64, u: &RadialField) -> Result<f64> {
    let (l, r) = pohozaev_sides(prob, mu, u)?;
    Ok(l - r)
}

/// `‖u‖² + λ∫φ_u u² − μ∫|u|^{p+1} − ∫gu`, i.e. `⟨I′_{λ,μ}(u), u⟩`.
pub fn nehari_residual(prob: &Problem, mu: f64, u: &RadialField) -> Result<f64> {
    let b = Functional::mu(mu)?.energy(prob, u)?;
    Ok(2.0 * b.h1_part + prob.lambda() * b.nonlocal_part - mu * b.power_part - b.source_part)
}

/// `I_λ(u) + ½‖u‖² + (3λ/4)∫φ_u u² − (p/(p+1))∫|u|^{p+1}`, which equals
/// `⟨I′_λ(u), u⟩` and vanishes at solutions.
pub fn decomposition_check(prob: &Problem, u: &RadialField) -> Result<f64> {
    let b = Functional::Full.energy(prob, u)?;
    let p = prob.p();
    Ok(b.total + b.h1_part + 0.75 * prob.lambda() * b.nonlocal_part
        - p / (p + 1.0) * b.power_part)
}

/// `¼∫|∇u|² + (λ/8)∫φ_u u² − √(λ/8)∫|u|³`, nonnegative for every `u`.
pub fn ruiz_gap(u: &RadialField, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(invalid("lambda", format!("must be ≥ 0, got {lambda}")));
    }
    let grad_sq = u.grid().dirichlet_form(u.values(), u.values());
    let nonlocal = crate::poisson::nonlocal_energy(u);
    Ok(0.25 * grad_sq + lambda / 8.0 * nonlocal - (lambda / 8.0).sqrt() * lp_power(u, 3.0))
}

pub fn identity_report(
    prob: &Problem,
    mu: f64,
    u: &RadialField,
    tol: &IdentityTolerances,
) -> Result<IdentityReport> {
    let (l, r) = pohozaev_sides(prob, mu, u)?;
    let scale = l.abs() + r.abs();
    let pohozaev_relative = if scale > 0.0 { (l - r).abs() / scale } else { 0.0 };
    let nehari = nehari_residual(prob, mu, u)?;
    let decomposition = decomposition_check(prob, u)?;
    let norm_sq = Functional::Full.energy(prob, u)?.h1_part * 2.0;
    let ruiz = ruiz_gap(u, prob.lambda())?;
    let bound = tol.nehari * norm_sq;
    Ok(IdentityReport {
        pohozaev_residual: l - r,
        pohozaev_relative,
        nehari_residual: nehari,
        decomposition_residual: decomposition,
        ruiz_gap: ruiz,
        pohozaev_ok: pohozaev_relative <= tol.pohozaev,
        nehari_ok: nehari.abs() <= bound,
        decomposition_ok: decomposition.abs() <= bound,
        ruiz_ok: ruiz >= tol.ruiz,
    })
}

/// Chain of upper bounds on the energy of a solution `w`:
/// `I_λ(w) = −{½‖w‖² + (3λ/4)∫φ_w w² − (p/(p+1))∫|w|^{p+1}}`
/// `≤ −∫[½w² + √(λ/2)|w|³ − (p/(p+1))|w|^{p+1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBoundChain {
    pub energy: f64,
    /// Middle expression, exact at solutions.
    pub decomposition_value: f64,
    /// Right-most expression, obtained from the Ruiz inequality.
    pub relaxed_bound: f64,
    pub energy_le_decomposition: bool,
    pub decomposition_le_relaxed: bool,
    pub relaxed_negative: bool,
}

pub fn energy_bound_chain(prob: &Problem, w: &RadialField, rel_tol: f64) -> Result<EnergyBoundChain> {
    let b = Functional::Full.energy(prob, w)?;
    let p = prob.p();
    let lambda = prob.lambda();
    let decomposition_value =
        -(b.h1_part + 0.75 * lambda * b.nonlocal_part - p / (p + 1.0) * b.power_part);
    let l2 = w.grid().mass_form(w.values(), w.values());
    let relaxed_bound =
        -(0.5 * l2 + (lambda / 2.0).sqrt() * lp_power(w, 3.0) - p / (p + 1.0) * b.power_part);
    let within = |a: f64, c: f64| a <= c + rel_tol * (a.abs() + c.abs()).max(f64::MIN_POSITIVE);
    Ok(EnergyBoundChain {
        energy: b.total,
        decomposition_value,
        relaxed_bound,
        energy_le_decomposition: within(b.total, decomposition_value),
        decomposition_le_relaxed: within(decomposition_value, relaxed_bound),
        relaxed_negative: relaxed_bound < 0.0,
    })
}

/// Outcome of one λ of [`nonexistence_scan`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanEntry {
    pub lambda: f64,
    /// Positive-energy solution certified by the cut-off route
    /// (`‖u₁‖ ≤ M₀`, `λ < M₀⁻³`, residual within tolerance).
    pub certified: bool,
    /// A positive-energy critical point of `I_λ` was found (possibly without
    /// the λ-gate being satisfied).
    pub positive_energy_found: bool,
    pub energy_u0: Option<f64>,
    pub energy_u1: Option<f64>,
    pub norm_u1: Option<f64>,
    pub m0: Option<f64>,
    /// Energies of all genuine critical points of `I_λ` found at this λ.
    pub found_energies: Vec<f64>,
    pub all_found_negative: bool,
    pub chains: Vec<EnergyBoundChain>,
    pub chains_ok: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub entries: Vec<ScanEntry>,
    /// Smallest scanned λ at which certification fails.
    pub first_failure: Option<f64>,
    /// Certification reappears at some λ above `first_failure` (flagged as a
    /// solver artifact).
    pub reappears: bool,
}

/// Genuine critical points of `I_λ` among the solver's output: the minimizer,
/// and the cut-off trial or final points when they sit on the η-plateau.
fn genuine_points(prob: &Problem, outcome: &crate::solvers::SolveOutcome) -> Vec<CriticalPoint> {
    let mut out = vec![outcome.u0.clone()];
    match &outcome.route {
        Route::Continuation { .. } => out.push(outcome.u1.clone()),
        Route::Cutoff(c) => {
            let candidates = [(&c.trial, c.trial_radius), (&outcome.u1, c.m0)];
            for (point, radius) in candidates {
                if point.norm <= radius {
                    let p = CriticalPoint::new(prob, Functional::Full, point.u.clone(), point.kind);
                    if !out.iter().any(|q| (q.energy - p.energy).abs() <= 1e-8 * p.energy.abs().max(1.0)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Runs the two-solution pipeline for every λ (concurrently; results keep the
/// input order) and records certification and the energy-bound chain.
pub fn nonexistence_scan(
    template: &Problem,
    geo: &GeometryConstants,
    lambdas: &[f64],
    settings: &SolverSettings,
    chain_tol: f64,
) -> Result<ScanSummary> {
    if template.p() > 2.0 {
        return Err(invalid("p", format!("scan needs p ≤ 2, got {}", template.p())));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("lambdas", "must be strictly increasing"));
    }
    let problems = lambdas
        .iter()
        .map(|&l| template.with_lambda(l))
        .collect::<Result<Vec<_>>>()?;
    let entries: Vec<ScanEntry> = problems
        .par_iter()
        .map(|prob| scan_entry(prob, geo, settings, chain_tol))
        .collect();
    let first = entries.iter().position(|e| !e.certified);
    let reappears = first.is_some_and(|i| entries[i..].iter().any(|e| e.certified));
    Ok(ScanSummary {
        first_failure: first.map(|i| entries[i].lambda),
        reappears,
        entries,
    })
}

fn scan_entry(
    prob: &Problem,
    geo: &GeometryConstants,
    settings: &SolverSettings,
    chain_tol: f64,
) -> ScanEntry {
    let mut entry = ScanEntry {
        lambda: prob.lambda(),
        certified: false,
        positive_energy_found: false,
        energy_u0: None,
        energy_u1: None,
        norm_u1: None,
        m0: None,
        found_energies: Vec::new(),
        all_found_negative: true,
        chains: Vec::new(),
        chains_ok: true,
        error: None,
    };
    let found = match solve_two_solutions_with(prob, geo, settings) {
        Ok(outcome) => {
            entry.energy_u0 = Some(outcome.u0.energy);
            entry.energy_u1 = Some(outcome.u1.energy);
            entry.norm_u1 = Some(outcome.u1.norm);
            if let Route::Cutoff(c) = &outcome.route {
                entry.m0 = Some(c.m0);
            }
            entry.certified = outcome.is_certified(prob);
            if let Err(e) = outcome.certify(prob) {
                entry.error = Some(e.to_string());
            }
            genuine_points(prob, &outcome)
        }
        Err(e) => {
            entry.error = Some(e.to_string());
            // the minimizer alone may still be available
            match crate::solvers::local_minimizer(prob, geo, settings) {
                Ok(u0) => {
                    entry.energy_u0 = Some(u0.energy);
                    vec![u0]
                }
                Err(_) => Vec::new(),
            }
        }
    };
    for point in &found {
        entry.found_energies.push(point.energy);
        if point.energy > 0.0 {
            entry.positive_energy_found = true;
            entry.all_found_negative = false;
        }
        if let Ok(chain) = energy_bound_chain(prob, &point.u, chain_tol) {
            entry.chains_ok &= chain.energy_le_decomposition && chain.decomposition_le_relaxed;
            entry.chains.push(chain);
        } else {
            entry.chains_ok = false;
        }
    }
    entry
}
