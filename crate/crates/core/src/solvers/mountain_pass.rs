//! Path-deformation mountain-pass algorithm.
//!
//! A polygonal path from 0 to a negative-energy endpoint is deformed by
//! Sobolev-gradient steps applied to its highest interior node; after each
//! step the nodes are redistributed to equal H¹ arclength. Once the residual
//! at the maximizer is small, a Newton polish converges to the saddle
//! quadratically. The polished point replaces the maximizer, so warm starts
//! (μ-continuation) inherit an already good path.

use serde::Serialize;

use crate::error::{invalid, Result, SolverError};
use crate::functional::{Functional, Problem};
use crate::grid::{RadialField, RadialGrid};

use super::{dot, newton_polish, residual_norm, CriticalPoint, PointKind, SolverSettings};

/// Nodes of the deformed path and their energies.
#[derive(Debug, Clone, PartialEq)]
pub struct MountainPassPath {
    pub nodes: Vec<RadialField>,
    pub energies: Vec<f64>,
    pub max_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MountainPassResult {
    pub point: CriticalPoint,
    #[serde(skip)]
    pub path: MountainPassPath,
    /// Maximum of the functional on the initial path.
    pub initial_max: f64,
}

/// Mountain pass between 0 and `endpoint` along the initially straight path
/// with `settings.path_nodes` nodes. `rho` is the ring level below which the
/// path maximum must never fall.
pub fn mountain_pass(
    prob: &Problem,
    functional: Functional,
    endpoint: &RadialField,
    rho: f64,
    settings: &SolverSettings,
) -> Result<MountainPassResult> {
    prob.source().same_grid(endpoint)?;
    let k = settings.path_nodes;
    if k < 3 {
        return Err(invalid("path_nodes", format!("need at least 3, got {k}")));
    }
    let nodes = (0..k)
        .map(|i| endpoint.scaled(i as f64 / (k - 1) as f64))
        .collect();
    mountain_pass_from_path(prob, functional, nodes, rho, settings)
}

const STALL_WINDOW: usize = 200;

/// First interior maximum (smallest index on ties).
fn argmax(energies: &[f64]) -> usize {
    let mut best = 1;
    for i in 2..energies.len() - 1 {
        if energies[i] > energies[best] {
            best = i;
        }
    }
    best
}

fn h1_distance(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (grid.dirichlet_form(&d, &d) + grid.mass_form(&d, &d)).sqrt()
}

/// Moves the interior nodes to equal H¹ arclength along the polygon.
fn redistribute(grid: &RadialGrid, nodes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = nodes.len();
    let seg: Vec<f64> = nodes.windows(2).map(|w| h1_distance(grid, &w[0], &w[1])).collect();
    let mut cum = vec![0.0; m];
    for i in 0..m - 1 {
        cum[i + 1] = cum[i] + seg[i];
    }
    let total = cum[m - 1];
    let mut out = Vec::with_capacity(m);
    out.push(nodes[0].clone());
    let mut k = 0;
    for j in 1..m - 1 {
        let target = total * j as f64 / (m - 1) as f64;
        while k < m - 2 && cum[k + 1] < target {
            k += 1;
        }
        let theta = if seg[k] > 0.0 {
            ((target - cum[k]) / seg[k]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(
            nodes[k]
                .iter()
                .zip(&nodes[k + 1])
                .map(|(a, b)| (1.0 - theta) * a + theta * b)
                .collect(),
        );
    }
    out.push(nodes[m - 1].clone());
    out
}

pub(crate) fn mountain_pass_from_path(
    prob: &Problem,
    functional: Functional,
    nodes: Vec<RadialField>,
    rho: f64,
    settings: &SolverSettings,
) -> Result<MountainPassResult> {
    let grid = prob.grid().clone();
    let energy_of = |v: &[f64]| functional.total(prob, &RadialField::from_vec_unchecked(&grid, v.to_vec()));
    let mut path: Vec<Vec<f64>> = nodes
        .into_iter()
        .map(|n| n.with_dirichlet().into_values())
        .collect();
    if path.len() < 3 {
        return Err(invalid("path_nodes", format!("need at least 3, got {}", path.len())));
    }
    let mut energies: Vec<f64> = path.iter().map(|v| energy_of(v)).collect();
    let last = *energies.last().expect("non-empty path");
    if !(last < 0.0) {
        return Err(invalid("endpoint", format!("energy must be negative, got {last}")));
    }
    let initial_max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-8 * rho.abs().max(1.0);

    let mut switch = settings.newton_switch;
    let mut step: f64 = 1.0;
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut window = STALL_WINDOW;
    for iteration in 0..settings.max_iter {
        let k = argmax(&energies);
        let level = energies[k];
        history.push(level);
        if level < rho - slack {
            return Err(SolverError::PathCollapse { level, rho });
        }
        let u = RadialField::from_vec_unchecked(&grid, path[k].clone());
        let eval = functional.evaluate(prob, &u);
        residual = residual_norm(&eval.strong_residual());
        let norm = eval.norm_sq().sqrt();

        if best.is_infinite() || level < best - 1e-6 * best.abs() {
            best = level;
            since_best = 0;
        } else {
            since_best += 1;
        }
        // max-node descent can zigzag against the redistribution when the
        // path is coarse near the saddle; a stalled level hands over to Newton
        let stalled = since_best >= window;
        if stalled {
            since_best = 0;
        }

        if residual <= settings.tol_grad || residual <= switch * (1.0 + norm) || stalled {
            let polished = if residual <= settings.tol_grad {
                Ok((u.clone(), 0))
            } else {
                newton_polish(prob, functional, u.clone(), settings.tol_grad, settings.newton_max_iter)
                    .map(|o| (o.u, o.iterations))
            };
            match polished {
                Ok((v, newton_iterations)) if functional.total(prob, &v) >= rho - slack => {
                    let mut point = CriticalPoint::new(prob, functional, v, PointKind::MountainPass);
                    path[k] = point.u.values().to_vec();
                    energies[k] = point.energy;
                    let max_index = argmax(&energies);
                    point.level_estimate = energies[max_index];
                    point.iterations = iteration;
                    point.newton_iterations = newton_iterations;
                    history.push(point.level_estimate);
                    point.history = history;
                    let nodes = path
                        .into_iter()
                        .map(|v| RadialField::from_vec_unchecked(&grid, v))
                        .collect();
                    return Ok(MountainPassResult {
                        point,
                        path: MountainPassPath {
                            nodes,
                            energies,
                            max_index,
                        },
                        initial_max,
                    });
                }
                _ if !stalled => switch *= 0.25,
                _ => window *= 2,
            }
        }

        let grad = eval.nodal_gradient();
        let dir = grid.solve_gram(&grad);
        // ‖dir‖² in H¹ equals the slope, since dir = K⁻¹ grad
        let slope = dot(&grad, &dir);
        // relative trust region: one step moves the node by at most a quarter
        // of its norm, so a steep band of the cut-off cannot fling it away
        step = step.min(0.25 * (1.0 + norm) / slope.sqrt());
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = path[k].iter().zip(&dir).map(|(a, d)| a - step * d).collect();
            let e = energy_of(&trial);
            if e.is_finite() && e <= level - 1e-4 * step * slope {
                path[k] = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        path = redistribute(&grid, &path);
        energies = path.iter().map(|v| energy_of(v)).collect();
        step = (2.0 * step).min(4.0);
    }
    Err(SolverError::NonConvergence {
        stage: "mountain pass".into(),
        iterations: history.len(),
        residual,
    })
}
