//! Mode pipelines and artifact writers.

use std::fs;
use std::io;
use std::path::Path;
use std::result::Result;

use serde::Serialize;
use sm_core::*;

use crate::config::{Mode, RunConfig};
use crate::verify::{self, Check};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Solver(#[from] SolverError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl RunError {
    /// Hypothesis and parameter violations are problems with the input, so
    /// they share the configuration exit status.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Solver(SolverError::Hypothesis { .. })
            | RunError::Solver(SolverError::InvalidParameter { .. })
            | RunError::Solver(SolverError::InvalidGrid(_)) => 1,
            _ => 2,
        }
    }
}

/// What a finished run reports back to `main`.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub lines: Vec<String>,
}

struct Setup {
    sobolev: SobolevEstimate,
    c_p: f64,
    prob: Problem,
    geo: GeometryConstants,
    settings: SolverSettings,
}

fn setup(cfg: &RunConfig) -> Result<Setup, RunError> {
    let grid = RadialGrid::new(cfg.r_max, cfg.n)?;
    let sobolev = sobolev_constant(
        cfg.p,
        &grid,
        &SobolevSettings {
            seed: cfg.seed,
            ..SobolevSettings::default()
        },
    )?;
    let c_p = geometry_constants(cfg.p, sobolev.value, 0.0)?.c_p;
    let g = source_field(&grid, cfg.g_family, cfg.g_l2_target.resolve(c_p))?;
    let prob = Problem::new(cfg.lambda, cfg.p, g)?;
    let geo = geometry_constants(cfg.p, sobolev.value, prob.g_l2())?;
    let settings = SolverSettings {
        tol_grad: cfg.tol_grad,
        max_iter: cfg.max_iter,
        path_nodes: cfg.path_nodes,
        mu_points: cfg.mu_points,
        seed: cfg.seed,
        cutoff_m0: cfg.cutoff_m0,
        ..SolverSettings::default()
    };
    Ok(Setup {
        sobolev,
        c_p,
        prob,
        geo,
        settings,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    fs::create_dir_all(out_dir)?;
    match cfg.mode {
        Mode::Solve => solve(cfg, out_dir),
        Mode::Sweep => sweep(cfg, out_dir),
        Mode::Verify => verify_mode(cfg, out_dir),
        Mode::Sobolev => sobolev(cfg, out_dir),
    }
}

#[derive(Serialize)]
struct SolveRecord<'a> {
    mode: Mode,
    config: &'a RunConfig,
    sobolev: &'a SobolevEstimate,
    c_p: f64,
    g_l2: f64,
    energy_u0: f64,
    energy_u1: f64,
    level_u1: f64,
    norm_u0: f64,
    norm_u1: f64,
    certified: bool,
    certification_error: Option<String>,
    identities_u0: IdentityReport,
    identities_u1: IdentityReport,
    outcome: &'a SolveOutcome,
}

fn solve(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let s = setup(cfg)?;
    let outcome = solve_two_solutions_with(&s.prob, &s.geo, &s.settings)?;
    let tol = IdentityTolerances::default();
    let certification_error = outcome.certify(&s.prob).err().map(|e| e.to_string());
    let record = SolveRecord {
        mode: cfg.mode,
        config: cfg,
        sobolev: &s.sobolev,
        c_p: s.c_p,
        g_l2: s.prob.g_l2(),
        energy_u0: outcome.u0.energy,
        energy_u1: outcome.u1.energy,
        level_u1: outcome.u1.level_estimate,
        norm_u0: outcome.u0.norm,
        norm_u1: outcome.u1.norm,
        certified: certification_error.is_none(),
        certification_error: certification_error.clone(),
        identities_u0: identity_report(&s.prob, 1.0, &outcome.u0.u, &tol)?,
        identities_u1: identity_report(&s.prob, 1.0, &outcome.u1.u, &tol)?,
        outcome: &outcome,
    };
    write_json(&out_dir.join("result.json"), &record)?;
    write_profiles(&out_dir.join("profiles.csv"), &outcome.u0.u, &outcome.u1.u)?;

    let mut lines = vec![
        format!("I(u0) = {:.6e}, ||u0|| = {:.6e}", outcome.u0.energy, outcome.u0.norm),
        format!("I(u1) = {:.6e}, ||u1|| = {:.6e}", outcome.u1.energy, outcome.u1.norm),
    ];
    let exit_code = match certification_error {
        None => {
            lines.push("certified".into());
            0
        }
        Some(e) => {
            lines.push(format!("not certified: {e}"));
            2
        }
    };
    Ok(Outcome { exit_code, lines })
}

fn write_profiles(path: &Path, u0: &RadialField, u1: &RadialField) -> Result<(), RunError> {
    let phi0 = newtonian_potential(u0).into_field();
    let phi1 = newtonian_potential(u1).into_field();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(["r", "u0", "u1", "phi_u0", "phi_u1"])?;
    for (i, r) in u0.grid().nodes().iter().enumerate() {
        w.write_record([
            num(*r),
            num(u0.values()[i]),
            num(u1.values()[i]),
            num(phi0.values()[i]),
            num(phi1.values()[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SweepRow {
    lambda: f64,
    certified: bool,
    positive_energy_found: bool,
    energy_u0: Option<f64>,
    energy_u1: Option<f64>,
    norm_u1: Option<f64>,
    m0: Option<f64>,
    all_found_negative: bool,
    chains_ok: bool,
    error: Option<String>,
}

impl From<&ScanEntry> for SweepRow {
    fn from(e: &ScanEntry) -> Self {
        SweepRow {
            lambda: e.lambda,
            certified: e.certified,
            positive_energy_found: e.positive_energy_found,
            energy_u0: e.energy_u0,
            energy_u1: e.energy_u1,
            norm_u1: e.norm_u1,
            m0: e.m0,
            all_found_negative: e.all_found_negative,
            chains_ok: e.chains_ok,
            error: e.error.clone(),
        }
    }
}

/// Sweep row for p > 2, where no cut-off is involved.
fn continuation_row(prob: &Problem, geo: &GeometryConstants, settings: &SolverSettings) -> SweepRow {
    let mut row = SweepRow {
        lambda: prob.lambda(),
        certified: false,
        positive_energy_found: false,
        energy_u0: None,
        energy_u1: None,
        norm_u1: None,
        m0: None,
        all_found_negative: true,
        chains_ok: true,
        error: None,
    };
    match solve_two_solutions_with(prob, geo, settings) {
        Ok(o) => {
            row.energy_u0 = Some(o.u0.energy);
            row.energy_u1 = Some(o.u1.energy);
            row.norm_u1 = Some(o.u1.norm);
            row.positive_energy_found = o.u1.energy > 0.0;
            row.all_found_negative = o.u0.energy < 0.0 && o.u1.energy < 0.0;
            match o.certify(prob) {
                Ok(()) => row.certified = true,
                Err(e) => row.error = Some(e.to_string()),
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

#[derive(Serialize)]
struct SweepRecord<'a> {
    mode: Mode,
    config: &'a RunConfig,
    sobolev: &'a SobolevEstimate,
    geometry: GeometryConstants,
    first_failure: Option<f64>,
    reappears: bool,
    rows: &'a [SweepRow],
}

fn sweep(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let s = setup(cfg)?;
    let rows: Vec<SweepRow> = if cfg.p <= 2.0 {
        let summary = nonexistence_scan(&s.prob, &s.geo, &cfg.lambda_list, &s.settings, 1e-3)?;
        summary.entries.iter().map(SweepRow::from).collect()
    } else {
        cfg.lambda_list
            .iter()
            .map(|&l| Ok(continuation_row(&s.prob.with_lambda(l)?, &s.geo, &s.settings)))
            .collect::<Result<_, SolverError>>()?
    };
    let first = rows.iter().position(|r| !r.certified);
    let record = SweepRecord {
        mode: cfg.mode,
        config: cfg,
        sobolev: &s.sobolev,
        geometry: s.geo,
        first_failure: first.map(|i| rows[i].lambda),
        reappears: first.is_some_and(|i| rows[i..].iter().any(|r| r.certified)),
        rows: &rows,
    };
    write_json(&out_dir.join("result.json"), &record)?;

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(out_dir.join("sweep.csv"))?;
    w.write_record([
        "lambda",
        "certified",
        "positive_energy_found",
        "energy_u0",
        "energy_u1",
        "norm_u1",
        "m0",
        "all_found_negative",
        "chains_ok",
        "error",
    ])?;
    let mut lines = Vec::new();
    for r in &rows {
        w.write_record([
            num(r.lambda),
            r.certified.to_string(),
            r.positive_energy_found.to_string(),
            opt(r.energy_u0),
            opt(r.energy_u1),
            opt(r.norm_u1),
            opt(r.m0),
            r.all_found_negative.to_string(),
            r.chains_ok.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
        lines.push(format!(
            "lambda = {:e}: certified = {}{}",
            r.lambda,
            r.certified,
            r.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
        ));
    }
    w.flush()?;
    Ok(Outcome { exit_code: 0, lines })
}

#[derive(Serialize)]
struct VerifyRecord<'a> {
    mode: Mode,
    config: &'a RunConfig,
    checks: &'a [Check],
    passed: usize,
    failures: usize,
}

fn verify_mode(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let s = setup(cfg)?;
    let checks = verify::invariant_suite(&s.prob, &s.geo, &s.settings, cfg.seed)?;
    let failures = checks.iter().filter(|c| !c.passed).count();
    write_json(
        &out_dir.join("result.json"),
        &VerifyRecord {
            mode: cfg.mode,
            config: cfg,
            checks: &checks,
            passed: checks.len() - failures,
            failures,
        },
    )?;
    let mut lines: Vec<String> = checks
        .iter()
        .map(|c| format!("{}: {} ({})", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail))
        .collect();
    lines.push(format!("{} checks, {failures} failures", checks.len()));
    Ok(Outcome {
        exit_code: if failures == 0 { 0 } else { 3 },
        lines,
    })
}

#[derive(Serialize)]
struct SobolevRecord<'a> {
    mode: Mode,
    config: &'a RunConfig,
    sobolev: &'a SobolevEstimate,
    geometry: GeometryConstants,
}

fn sobolev(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let s = setup(cfg)?;
    write_json(
        &out_dir.join("result.json"),
        &SobolevRecord {
            mode: cfg.mode,
            config: cfg,
            sobolev: &s.sobolev,
            geometry: s.geo,
        },
    )?;
    Ok(Outcome {
        exit_code: 0,
        lines: vec![
            format!("S     = {:.8}", s.sobolev.value),
            format!("C_p   = {:.8}", s.geo.c_p),
            format!("alpha = {:.8}", s.geo.alpha),
            format!("rho   = {:.8}", s.geo.rho),
        ],
    })
}
