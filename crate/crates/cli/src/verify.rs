//! Invariant suite run by `mode = verify` on the configured problem.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sm_core::poisson::poisson_residual;
use sm_core::*;

const FIELDS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn fd_mismatch(f: Functional, prob: &Problem, u: &RadialField, v: &RadialField) -> Result<f64> {
    let eps = 1e-5;
    let plus = f.energy(prob, &u.axpy(eps, v)?)?.total;
    let minus = f.energy(prob, &u.axpy(-eps, v)?)?.total;
    let fd = (plus - minus) / (2.0 * eps);
    let an = l2_inner(&f.gradient(prob, u)?, v)?;
    Ok(((fd - an) / an).abs())
}

pub fn invariant_suite(
    prob: &Problem,
    geo: &GeometryConstants,
    settings: &SolverSettings,
    seed: u64,
) -> Result<Vec<Check>> {
    let grid = prob.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: Vec<RadialField> = (0..FIELDS).map(|_| random_smooth_field(grid, &mut rng)).collect();
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    let mut monotone = true;
    for u in &fields {
        let phi = newtonian_potential(u).into_field();
        let scale = u.values().iter().map(|v| v * v).fold(1.0, f64::max);
        worst = worst.max(poisson_residual(u, &phi) / scale);
        let v = phi.values();
        monotone &= v.iter().all(|&x| x >= 0.0) && v.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    }
    out.push(check("poisson_equation", worst <= 1e-9, format!("max relative residual {worst:.2e}")));
    out.push(check("potential_sign_and_monotonicity", monotone, format!("{FIELDS} fields")));

    let mut cs = true;
    for pair in fields.windows(2) {
        let lhs = h1_inner(&pair[0], &pair[1])?.powi(2);
        cs &= lhs <= h1_norm_sq(&pair[0]) * h1_norm_sq(&pair[1]) * (1.0 + 1e-12);
    }
    out.push(check("cauchy_schwarz", cs, format!("{} pairs", FIELDS - 1)));

    let mut min_gap = f64::INFINITY;
    for u in &fields {
        for lambda in [0.1, 1.0, 10.0, 100.0, prob.lambda()] {
            min_gap = min_gap.min(ruiz_gap(u, lambda)?);
        }
    }
    out.push(check("ruiz_inequality", min_gap >= -1e-9, format!("min gap {min_gap:.3e}")));

    let mut worst = 0.0f64;
    for u in &fields {
        let d = decomposition_check(prob, u)?;
        let n = nehari_residual(prob, 1.0, u)?;
        let b = energy(prob, u)?;
        let scale = 2.0 * b.h1_part + prob.lambda() * b.nonlocal_part + b.power_part + b.source_part.abs();
        worst = worst.max((d - n).abs() / scale);
    }
    out.push(check("decomposition_equals_nehari", worst <= 1e-12, format!("max relative gap {worst:.2e}")));

    let mut worst = 0.0f64;
    for pair in fields.windows(2) {
        let (u, v) = (&pair[0], &pair[1]);
        let cut = CutoffSpec::new(h1_norm(u))?;
        for f in [Functional::Full, Functional::mu(0.75)?, Functional::Cutoff(cut)] {
            worst = worst.max(fd_mismatch(f, prob, u, v)?);
        }
    }
    out.push(check("gradient_consistency", worst <= 1e-5, format!("max relative mismatch {worst:.2e}")));

    let mut bitwise = true;
    for u in &fields {
        let cut = CutoffSpec::new(2.0 * h1_norm(u))?;
        bitwise &= energy_cutoff(prob, &cut, u)?.total == energy(prob, u)?.total;
        bitwise &= gradient_cutoff(prob, &cut, u)? == gradient(prob, u)?;
    }
    out.push(check("cutoff_plateau", bitwise, "energy and gradient bitwise equal inside M".into()));

    let profile = (geo.ring_profile(geo.alpha) - geo.c_p).abs() / geo.c_p;
    out.push(check("ring_profile_at_alpha", profile <= 1e-10, format!("|h(α) − C_p|/C_p = {profile:.2e}")));

    if geo.g3_holds {
        let mut lowest = f64::INFINITY;
        for u in &fields {
            let on_ring = u.scaled(geo.alpha / h1_norm(u));
            lowest = lowest.min(energy(prob, &on_ring)?.total);
        }
        out.push(check(
            "ring_lower_bound",
            lowest >= geo.rho - 1e-9,
            format!("min I on ‖u‖ = α is {lowest:.6e}, ρ = {:.6e}", geo.rho),
        ));
    }

    solution_checks(prob, geo, settings, &mut out)?;
    Ok(out)
}

fn solution_checks(
    prob: &Problem,
    geo: &GeometryConstants,
    settings: &SolverSettings,
    out: &mut Vec<Check>,
) -> Result<()> {
    let outcome = match solve_two_solutions_with(prob, geo, settings) {
        Ok(o) => o,
        Err(e) => {
            out.push(check("solution_pair", false, e.to_string()));
            return Ok(());
        }
    };
    out.push(match outcome.certify(prob) {
        Ok(()) => check(
            "solution_pair",
            true,
            format!("I(u0) = {:.6e} < 0 < I(u1) = {:.6e}", outcome.u0.energy, outcome.u1.energy),
        ),
        Err(e) => check("solution_pair", false, e.to_string()),
    });

    let worst = outcome.u0.grad_residual.max(outcome.u1.grad_residual);
    out.push(check(
        "solution_residuals",
        worst <= settings.tol_grad,
        format!("max residual {worst:.2e}, tol {:.1e}", settings.tol_grad),
    ));

    let tol = IdentityTolerances::default();
    for (name, point) in [("identities_u0", &outcome.u0), ("identities_u1", &outcome.u1)] {
        let r = identity_report(prob, 1.0, &point.u, &tol)?;
        out.push(check(
            name,
            r.all_ok(),
            format!(
                "pohozaev {:.2e} rel, nehari {:.2e}, ruiz gap {:.2e}",
                r.pohozaev_relative, r.nehari_residual, r.ruiz_gap
            ),
        ));
    }

    if let Route::Continuation { stages, .. } = &outcome.route {
        let monotone = stages
            .windows(2)
            .all(|w| w[1].level_estimate <= w[0].level_estimate + settings.tol_grad);
        let above = stages.iter().all(|s| s.level_estimate >= geo.rho);
        out.push(check(
            "continuation_levels",
            monotone && above,
            format!("{} stages, nonincreasing {monotone}, all ≥ ρ {above}", stages.len()),
        ));
    }
    Ok(())
}
