use std::sync::OnceLock;

use sm_core::*;

fn grid() -> RadialGrid {
    RadialGrid::new(20.0, 1024).unwrap()
}

fn sobolev(p: f64) -> f64 {
    static S3: OnceLock<f64> = OnceLock::new();
    static S2: OnceLock<f64> = OnceLock::new();
    let cell = if p == 3.0 { &S3 } else { &S2 };
    *cell.get_or_init(|| sobolev_constant(p, &grid(), &SobolevSettings::default()).unwrap().value)
}

fn problem(p: f64, lambda: f64, fraction: f64) -> (Problem, GeometryConstants) {
    let s = sobolev(p);
    let c_p = geometry_constants(p, s, 0.0).unwrap().c_p;
    let g = source_field(&grid(), SourceFamily::Exponential, fraction * c_p).unwrap();
    let prob = Problem::new(lambda, p, g).unwrap();
    let geo = geometry_constants(p, s, prob.g_l2()).unwrap();
    (prob, geo)
}

#[test]
fn minimizer_without_source_is_zero() {
    let (prob, geo) = problem(3.0, 1.0, 0.0);
    let u0 = local_minimizer(&prob, &geo, &SolverSettings::default()).unwrap();
    assert_eq!(u0.energy, 0.0);
    assert!(u0.u.values().iter().all(|&v| v == 0.0));
}

#[test]
fn minimizer_is_interior_negative_and_monotone() {
    let settings = SolverSettings::default();
    for fraction in [0.5, 0.9] {
        let (prob, geo) = problem(3.0, 1.0, fraction);
        let u0 = local_minimizer(&prob, &geo, &settings).unwrap();
        assert!(u0.energy < 0.0);
        assert!(u0.norm < geo.alpha);
        assert!(u0.grad_residual <= settings.tol_grad);
        assert_eq!(u0.kind, PointKind::Minimizer);
        for w in u0.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs());
        }
    }
}

#[test]
fn scaling_endpoint_examples() {
    let g = RadialGrid::new(40.0, 4096).unwrap();
    let prob = Problem::new(1.0, 3.0, g.zeros()).unwrap();
    let w = g.sample(|r| (-0.5 * r).exp()).with_dirichlet();
    let at = |t: f64| energy_mu(&prob, 0.5, &scale_transform(&w, t).unwrap()).unwrap().total;
    assert!(at(1.0) > 0.0);
    assert!((at(1.0) - 6.125 * std::f64::consts::PI).abs() < 1e-3 * at(1.0));
    assert!(at(5.0) < 0.0);
    // sign change of t⁴/8 − 2.25t² − 4 near 4.43
    assert!(at(4.3) > 0.0 && at(4.6) < 0.0);

    let e = find_endpoint(&prob, 0.5, EndpointMode::Scaling, 1.0).unwrap();
    for mu in [0.5, 0.75, 1.0] {
        assert!(energy_mu(&prob, mu, &e).unwrap().total < 0.0);
    }
}

#[test]
fn scaling_endpoint_needs_p_above_two() {
    let (prob, geo) = problem(2.0, 1.0, 0.5);
    assert!(find_endpoint(&prob, 0.5, EndpointMode::Scaling, geo.alpha).is_err());
}

#[test]
fn cutoff_ray_endpoint_drops_the_nonlocal_term() {
    let (prob, geo) = problem(2.0, 1.0, 0.5);
    let cut = CutoffSpec::new(3.0).unwrap();
    let e = find_endpoint(&prob, 1.0, EndpointMode::CutoffRay(cut), geo.alpha).unwrap();
    assert!(h1_norm(&e) >= 2.0 * cut.radius());
    let b = energy_cutoff(&prob, &cut, &e).unwrap();
    assert!(b.total < 0.0);
    assert_eq!(b.nonlocal_weight, 0.0);
    let plain = energy(&prob.with_lambda(0.0).unwrap(), &e).unwrap().total;
    assert_eq!(b.total, plain);
}

#[test]
fn mountain_pass_level_and_certificates() {
    let (prob, geo) = problem(3.0, 1.0, 0.5);
    let settings = SolverSettings::default();
    let e = find_endpoint(&prob, 1.0, EndpointMode::Scaling, geo.alpha).unwrap();
    let result = mountain_pass(&prob, Functional::Full, &e, geo.rho, &settings).unwrap();
    let point = &result.point;
    assert_eq!(point.kind, PointKind::MountainPass);
    assert!(point.level_estimate >= geo.rho);
    assert!(result.initial_max >= point.level_estimate - settings.tol_grad);
    assert!(point.grad_residual <= settings.tol_grad);
    let nehari = nehari_residual(&prob, 1.0, &point.u).unwrap();
    assert!(nehari.abs() <= 1e-4 * point.norm * point.norm);
    let path = &result.path;
    assert!(path.nodes[0].values().iter().all(|&v| v == 0.0));
    assert!(*path.energies.last().unwrap() < 0.0);
}

#[test]
fn mu_continuation_levels() {
    let (prob, geo) = problem(3.0, 1.0, 0.5);
    let settings = SolverSettings::default();
    let mus = mu_grid(6).unwrap();
    let e = find_endpoint(&prob, mus[0], EndpointMode::Scaling, geo.alpha).unwrap();
    let stages = mu_continuation(&prob, &mus, &e, geo.rho, &settings).unwrap();
    assert_eq!(stages.len(), 6);
    for w in stages.windows(2) {
        assert!(w[1].level_estimate <= w[0].level_estimate + 1e-6);
    }
    for (mu, s) in mus.iter().zip(&stages) {
        assert!(s.level_estimate >= geo.rho);
        assert!(s.grad_residual <= settings.tol_grad);
        let (l, r) = pohozaev_sides(&prob, *mu, &s.u).unwrap();
        assert!((l - r).abs() <= 1e-3 * (l.abs() + r.abs()), "μ = {mu}");
    }
    let max_norm = stages.iter().map(|s| s.norm).fold(0.0, f64::max);
    assert!(max_norm.is_finite() && max_norm < 10.0 * geo.alpha);
}

#[test]
fn mu_continuation_rejects_bad_grids() {
    let (prob, geo) = problem(3.0, 1.0, 0.5);
    let e = prob.grid().zeros();
    let s = SolverSettings::default();
    assert!(mu_continuation(&prob, &[0.5, 0.9], &e, geo.rho, &s).is_err());
    assert!(mu_continuation(&prob, &[0.7, 0.6, 1.0], &e, geo.rho, &s).is_err());
    assert!(mu_continuation(&prob, &[0.4, 1.0], &e, geo.rho, &s).is_err());
}

#[test]
fn two_solutions_p3() {
    let (prob, _) = problem(3.0, 1.0, 0.5);
    let (u0, u1) = solve_two_solutions(&prob, &SolverSettings::default()).unwrap();
    assert!(u0.energy < 0.0 && 0.0 < u1.energy);
    for u in [&u0, &u1] {
        let d = decomposition_check(&prob, &u.u).unwrap();
        assert!(d.abs() <= 1e-4 * u.norm * u.norm);
    }
}

#[test]
fn hypotheses_are_enforced() {
    let (prob, _) = problem(3.0, 1.0, 0.0);
    assert!(matches!(
        solve_two_solutions(&prob, &SolverSettings::default()),
        Err(SolverError::Hypothesis { hypothesis: "(G1)", .. })
    ));
    let (prob, geo) = problem(3.0, 1.0, 1.05);
    assert!(!geo.g3_holds);
    assert!(matches!(
        solve_two_solutions_with(&prob, &geo, &SolverSettings::default()),
        Err(SolverError::Hypothesis { hypothesis: "(G3)", .. })
    ));
}

#[test]
fn cutoff_route_certifies_below_the_gate() {
    // ‖u₁‖ ≈ 15 for p = 2, so M₀ = 4‖u₁‖ ≈ 60 admits λ < 4.5e-6
    let (prob, geo) = problem(2.0, 1e-6, 0.5);
    let outcome = solve_two_solutions_with(&prob, &geo, &SolverSettings::default()).unwrap();
    outcome.certify(&prob).unwrap();
    let Route::Cutoff(c) = &outcome.route else {
        panic!("p = 2 must take the cut-off route");
    };
    assert!(c.within_plateau && c.gate_ok);
    let cut = CutoffSpec::new(c.m0).unwrap();
    assert_eq!(
        gradient(&prob, &outcome.u1.u).unwrap(),
        gradient_cutoff(&prob, &cut, &outcome.u1.u).unwrap()
    );
}

#[test]
fn cutoff_route_reports_the_gate() {
    let (prob, geo) = problem(2.0, 1e-3, 0.5);
    let outcome = solve_two_solutions_with(&prob, &geo, &SolverSettings::default()).unwrap();
    assert!(outcome.u1.energy > 0.0);
    assert!(matches!(outcome.certify(&prob), Err(SolverError::LambdaGate { .. })));
}
