//! Numerical estimate of the embedding constant
//! `S = inf { ‖u‖ : |u|_{p+1} = 1 }` over radial grid fields.
//!
//! The quotient `Q(u) = ‖u‖ / |u|_{p+1}` is homogeneous of degree zero, so we
//! descend on `J(u) = ln ‖u‖ − ln |u|_{p+1}` with H¹-preconditioned steps and
//! renormalize after each step. Several starting profiles are tried; the best
//! value is returned. Any grid field gives an upper bound, and the estimate is
//! the smallest quotient actually attained.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result, SolverError};
use crate::grid::{h1_norm, lp_power, RadialField, RadialGrid};

/// Settings of the multi-start descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevSettings {
    pub max_iter: usize,
    /// Stop when the H¹-dual norm of `J′` falls below this value.
    pub tol: f64,
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for SobolevSettings {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-11,
            random_starts: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolevEstimate {
    pub value: f64,
    pub iterations: usize,
    pub dual_residual: f64,
    #[serde(skip)]
    pub optimizer: RadialField,
}

/// `‖u‖ / |u|_{p+1}`.
pub fn sobolev_quotient(u: &RadialField, p: f64) -> f64 {
    h1_norm(u) / lp_power(u, p + 1.0).powf(1.0 / (p + 1.0))
}

struct Descent<'a> {
    grid: &'a RadialGrid,
    q: f64,
}

impl Descent<'_> {
    fn log_quotient(&self, u: &[f64]) -> f64 {
        let norm_sq = self.grid.dirichlet_form(u, u) + self.grid.mass_form(u, u);
        let power: f64 = u
            .iter()
            .zip(self.grid.cell_volumes())
            .map(|(x, w)| w * x.abs().powf(self.q))
            .sum();
        0.5 * norm_sq.ln() - power.ln() / self.q
    }

    /// Nodal derivative of `J` (boundary zeroed).
    fn derivative(&self, u: &[f64]) -> Vec<f64> {
        let mut ku = vec![0.0; u.len()];
        self.grid.apply_gram(u, &mut ku);
        let norm_sq: f64 = ku.iter().zip(u).map(|(a, b)| a * b).sum();
        let w = self.grid.cell_volumes();
        let power: f64 = u.iter().zip(w).map(|(x, wi)| wi * x.abs().powf(self.q)).sum();
        let mut d: Vec<f64> = (0..u.len())
            .map(|i| {
                ku[i] / norm_sq - w[i] * u[i].abs().powf(self.q - 2.0) * u[i] / power
            })
            .collect();
        d[self.grid.boundary()] = 0.0;
        d
    }

    fn run(&self, start: Vec<f64>, settings: &SobolevSettings) -> (Vec<f64>, f64, usize, f64) {
        let mut u = normalize(self.grid, start);
        let mut value = self.log_quotient(&u);
        let mut step = 1.0;
        let mut dual = f64::INFINITY;
        for it in 0..settings.max_iter {
            let grad = self.derivative(&u);
            let dir = self.grid.solve_gram(&grad);
            let slope: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
            dual = slope.max(0.0).sqrt();
            if dual <= settings.tol {
                return (u, value, it, dual);
            }
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a - step * d).collect();
                let tv = self.log_quotient(&trial);
                if tv.is_finite() && tv <= value - 1e-4 * step * slope {
                    u = normalize(self.grid, trial);
                    value = tv;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                return (u, value, it, dual);
            }
            step = (step * 2.0).min(1e3);
        }
        (u, value, settings.max_iter, dual)
    }
}

fn normalize(grid: &RadialGrid, mut u: Vec<f64>) -> Vec<f64> {
    let b = grid.boundary();
    u[b] = 0.0;
    let n = (grid.dirichlet_form(&u, &u) + grid.mass_form(&u, &u)).sqrt();
    u.iter_mut().for_each(|x| *x /= n);
    u
}

/// Estimate of `S` for exponent `p` on `grid`.
pub fn sobolev_constant(p: f64, grid: &RadialGrid, settings: &SobolevSettings) -> Result<SobolevEstimate> {
    if !(p > 1.0 && p < 5.0) {
        return Err(invalid("p", format!("must lie in (1, 5), got {p}")));
    }
    let r_max = grid.r_max();
    let taper = move |r: f64| {
        let x = r / r_max;
        (1.0 - x * x).powi(2)
    };
    let mut starts: Vec<Vec<f64>> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&s| grid.sample(|r| (-(r / s).powi(2)).exp() * taper(r)).into_values())
        .collect();
    starts.push(grid.sample(|r| (-r).exp() * (1.0 + r) * taper(r)).into_values());
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    for _ in 0..settings.random_starts {
        let (a, b): (f64, f64) = (rng.gen_range(0.3..3.0), rng.gen_range(0.0..1.0));
        let s2: f64 = rng.gen_range(0.5..4.0);
        starts.push(
            grid.sample(|r| ((-(r / a).powi(2)).exp() + b * (-r / s2).exp()) * taper(r))
                .into_values(),
        );
    }

    let descent = Descent { grid, q: p + 1.0 };
    let runs: Vec<_> = starts
        .into_par_iter()
        .map(|s| descent.run(s, settings))
        .collect();
    let (u, value, iterations, dual) = runs
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one start");
    if dual > 1e3 * settings.tol.max(1e-12) && dual > 1e-7 {
        return Err(SolverError::NonConvergence {
            stage: "Sobolev constant descent".into(),
            iterations,
            residual: dual,
        });
    }
    let optimizer = RadialField::from_vec_unchecked(grid, u);
    Ok(SobolevEstimate {
        value: value.exp(),
        iterations,
        dual_residual: dual,
        optimizer,
    })
}
