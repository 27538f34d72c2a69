//! Radial representation of functions on ℝ³.
//!
//! A radial function is sampled on the uniform mesh `r_i = i·h`, `i = 0..n`.
//! Integrals over ℝ³ use the composite trapezoid rule on `4π f(r) r²`, plus the
//! volume `πh³/6` of the central ball `|x| < h/2` attached to the origin node
//! (the trapezoid weight there is zero):
//!
//! ```text
//! w_0 = πh³/6,   w_1 = (23/24)·4πh³,   w_i = 4πh r_i²,   w_{n−1} = 2πh r_max².
//! ```
//!
//! The Dirichlet form `∫|∇u|²` is `Σ κ_{i+½} (u_{i+1} − u_i)²` with
//! `κ_{i+½} = 4π r_i r_{i+1} / h` and `κ_½ = πh`. The flux-form Laplacian
//! `(Δ_h u)_i = −(S u)_i / w_i`, with `S` the stiffness matrix, is then the
//! standard radial stencil `u″ + 2u′/r` for `i ≥ 2`, `6(u_1 − u_0)/h²` at the
//! origin, and exact on `a + b r²` at node 1. The H¹ Gram matrix is symmetric
//! positive definite tridiagonal, and the discrete Newtonian potential of
//! [`crate::poisson`] inverts the same operator.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{invalid, Result, SolverError};

/// Smallest admissible node count.
pub const MIN_NODES: usize = 16;

#[derive(Debug)]
struct GridData {
    r_max: f64,
    n: usize,
    h: f64,
    nodes: Vec<f64>,
    cell_volumes: Vec<f64>,
    edge_weights: Vec<f64>,
}

/// Uniform mesh on `[0, r_max]` carrying the quadrature and stiffness weights.
///
/// Cloning is cheap; the weights are shared.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    data: Arc<GridData>,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
            || (self.data.n == other.data.n && self.data.r_max == other.data.r_max)
    }
}

impl RadialGrid {
    /// Builds the mesh with `n` nodes and spacing `r_max / (n − 1)`.
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(SolverError::InvalidGrid(format!(
                "r_max must be positive and finite, got {r_max}"
            )));
        }
        if n < MIN_NODES {
            return Err(SolverError::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let h = r_max / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { r_max } else { i as f64 * h })
            .collect();
        let cell_volumes = nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| match i {
                0 => PI * h.powi(3) / 6.0,
                // keeps the flux Laplacian exact on quadratics at the first node
                1 => 23.0 / 24.0 * 4.0 * PI * h.powi(3),
                _ if i == n - 1 => 2.0 * PI * h * r * r,
                _ => 4.0 * PI * h * r * r,
            })
            .collect();
        let edge_weights = nodes
            .windows(2)
            .map(|e| {
                if e[0] == 0.0 {
                    PI * h
                } else {
                    4.0 * PI * e[0] * e[1] / h
                }
            })
            .collect();
        Ok(Self {
            data: Arc::new(GridData {
                r_max,
                n,
                h,
                nodes,
                cell_volumes,
                edge_weights,
            }),
        })
    }

    pub fn r_max(&self) -> f64 {
        self.data.r_max
    }

    pub fn len(&self) -> usize {
        self.data.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.data.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.data.nodes
    }

    /// Quadrature weights `w_i` of `∫ · dx`.
    pub fn cell_volumes(&self) -> &[f64] {
        &self.data.cell_volumes
    }

    /// Element weights `κ_{i+½}` of the Dirichlet form, length `n − 1`.
    pub fn edge_weights(&self) -> &[f64] {
        &self.data.edge_weights
    }

    /// Index of the Dirichlet node at `r_max`.
    pub fn boundary(&self) -> usize {
        self.data.n - 1
    }

    pub fn zeros(&self) -> RadialField {
        RadialField {
            grid: self.clone(),
            values: vec![0.0; self.len()],
        }
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> RadialField {
        RadialField {
            grid: self.clone(),
            values: self.nodes().iter().map(|&r| f(r)).collect(),
        }
    }

    pub(crate) fn quad(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(self.cell_volumes())
            .map(|(v, w)| v * w)
            .sum()
    }

    pub(crate) fn dirichlet_form(&self, u: &[f64], v: &[f64]) -> f64 {
        self.edge_weights()
            .iter()
            .enumerate()
            .map(|(i, k)| k * (u[i + 1] - u[i]) * (v[i + 1] - v[i]))
            .sum()
    }

    pub(crate) fn mass_form(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter()
            .zip(v)
            .zip(self.cell_volumes())
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    /// `K u` for the H¹ Gram matrix `K = stiffness + diag(w)`.
    pub(crate) fn apply_gram(&self, u: &[f64], out: &mut [f64]) {
        self.apply_stiffness(u, out);
        for ((o, x), w) in out.iter_mut().zip(u).zip(self.cell_volumes()) {
            *o += w * x;
        }
    }

    pub(crate) fn apply_stiffness(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, k) in self.edge_weights().iter().enumerate() {
            let flux = k * (u[i + 1] - u[i]);
            out[i] -= flux;
            out[i + 1] += flux;
        }
    }

    /// Solves `K x = b` with `x = 0` imposed at `r_max` (the boundary entry of `b`
    /// is ignored). Thomas algorithm, O(n).
    pub(crate) fn solve_gram(&self, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        let m = n - 1; // unknowns 0..m, node m is Dirichlet
        let k = self.edge_weights();
        let w = self.cell_volumes();
        let mut diag: Vec<f64> = (0..m)
            .map(|i| {
                let left = if i > 0 { k[i - 1] } else { 0.0 };
                w[i] + left + k[i]
            })
            .collect();
        let mut rhs: Vec<f64> = b[..m].to_vec();
        for i in 1..m {
            let factor = -k[i - 1] / diag[i - 1];
            diag[i] -= factor * (-k[i - 1]);
            rhs[i] -= factor * rhs[i - 1];
        }
        let mut x = vec![0.0; n];
        x[m - 1] = rhs[m - 1] / diag[m - 1];
        for i in (0..m - 1).rev() {
            x[i] = (rhs[i] + k[i] * x[i + 1]) / diag[i];
        }
        x
    }
}

/// Samples of a radial function on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: &RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", grid.len(), values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("values", format!("non-finite sample at node {i}")));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub(crate) fn from_vec_unchecked(grid: &RadialGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &RadialField) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    /// Sets the value at `r_max` to zero.
    pub fn with_dirichlet(mut self) -> Self {
        let b = self.grid.boundary();
        self.values[b] = 0.0;
        self
    }

    pub fn same_grid(&self, other: &RadialField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(SolverError::GridMismatch)
        }
    }

    /// Linear interpolation, zero beyond `r_max`.
    pub fn eval(&self, r: f64) -> f64 {
        let h = self.grid.spacing();
        let last = self.grid.boundary();
        if r >= self.grid.r_max() {
            return if r == self.grid.r_max() {
                self.values[last]
            } else {
                0.0
            };
        }
        let x = (r.max(0.0)) / h;
        let i = (x.floor() as usize).min(last - 1);
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// `4π ∫₀^{r_max} f(r) r² dr` by the trapezoid rule (plus the central ball).
pub fn integrate3d(f: &RadialField) -> f64 {
    f.grid.quad(&f.values)
}

/// `‖u‖² = ∫|∇u|² + u² dx`.
pub fn h1_norm_sq(u: &RadialField) -> f64 {
    gradient_sq(u) + u.grid.mass_form(&u.values, &u.values)
}

/// `∫|∇u|² dx`.
pub fn gradient_sq(u: &RadialField) -> f64 {
    u.grid.dirichlet_form(&u.values, &u.values)
}

pub fn h1_norm(u: &RadialField) -> f64 {
    h1_norm_sq(u).sqrt()
}

/// `|u|_q = (∫|u|^q dx)^{1/q}` for `q ≥ 1`.
pub fn lp_norm(u: &RadialField, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(invalid("q", format!("exponent must be ≥ 1, got {q}")));
    }
    Ok(lp_power(u, q).powf(1.0 / q))
}

/// `∫|u|^q dx` without the root.
pub fn lp_power(u: &RadialField, q: f64) -> f64 {
    u.values
        .iter()
        .zip(u.grid.cell_volumes())
        .map(|(v, w)| w * v.abs().powf(q))
        .sum()
}

/// `∫∇u·∇v + uv dx`.
pub fn h1_inner(u: &RadialField, v: &RadialField) -> Result<f64> {
    u.same_grid(v)?;
    Ok(u.grid.dirichlet_form(&u.values, &v.values) + u.grid.mass_form(&u.values, &v.values))
}

/// `∫uv dx`.
pub fn l2_inner(u: &RadialField, v: &RadialField) -> Result<f64> {
    u.same_grid(v)?;
    Ok(u.grid.mass_form(&u.values, &v.values))
}

/// The mass-preserving dilation `w_t(r) = t²·w(t·r)`, with `w` taken as zero
/// beyond `r_max`.
pub fn scale_transform(w: &RadialField, t: f64) -> Result<RadialField> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("scale must be positive, got {t}")));
    }
    if t == 1.0 {
        return Ok(w.clone());
    }
    let t2 = t * t;
    let values = w
        .grid
        .nodes()
        .iter()
        .map(|&r| t2 * w.eval(t * r))
        .collect();
    Ok(RadialField::from_vec_unchecked(&w.grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn grid_spacing_matches_definition() {
        let g = RadialGrid::new(20.0, 2048).unwrap();
        assert_eq!(g.spacing(), 20.0 / 2047.0);
        let g = RadialGrid::new(40.0, 4096).unwrap();
        assert_eq!(g.spacing(), 40.0 / 4095.0);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(*g.nodes().last().unwrap(), 40.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(RadialGrid::new(0.0, 100).is_err());
        assert!(RadialGrid::new(-1.0, 100).is_err());
        assert!(RadialGrid::new(f64::NAN, 100).is_err());
        assert!(RadialGrid::new(10.0, 15).is_err());
        assert!(RadialGrid::new(10.0, 16).is_ok());
    }

    #[test]
    fn weights_sum_to_ball_volume() {
        let g = RadialGrid::new(3.0, 101).unwrap();
        let total: f64 = g.cell_volumes().iter().sum();
        assert!(rel(total, 4.0 * PI * 27.0 / 3.0) < 1e-3);
    }

    #[test]
    fn field_rejects_wrong_length_and_nan() {
        let g = RadialGrid::new(1.0, 16).unwrap();
        assert!(RadialField::new(&g, vec![0.0; 15]).is_err());
        let mut v = vec![0.0; 16];
        v[3] = f64::INFINITY;
        assert!(RadialField::new(&g, v).is_err());
    }

    #[test]
    fn integrate_closed_forms() {
        let g = RadialGrid::new(40.0, 4096).unwrap();
        assert_eq!(integrate3d(&g.zeros()), 0.0);
        let f = g.sample(|r| (-r).exp());
        assert!(rel(integrate3d(&f), 8.0 * PI) < 1e-4);
        let f = g.sample(|r| (-2.0 * r).exp());
        assert!(rel(integrate3d(&f), PI) < 1e-4);
    }

    #[test]
    fn h1_norm_closed_form() {
        let g = RadialGrid::new(40.0, 4096).unwrap();
        assert_eq!(h1_norm_sq(&g.zeros()), 0.0);
        let u = g.sample(|r| (-0.5 * r).exp());
        assert!(rel(h1_norm_sq(&u), 10.0 * PI) < 1e-3);
        assert!(rel(gradient_sq(&u), 2.0 * PI) < 1e-3);
        assert_eq!(h1_norm_sq(&u.scaled(2.0)), 4.0 * h1_norm_sq(&u));
    }

    #[test]
    fn lp_norm_closed_forms() {
        let g = RadialGrid::new(40.0, 4096).unwrap();
        assert_eq!(lp_norm(&g.zeros(), 4.0).unwrap(), 0.0);
        let u = g.sample(|r| (-0.5 * r).exp());
        assert!((lp_norm(&u, 2.0).unwrap() - (8.0 * PI).sqrt()).abs() < 1e-4);
        assert!((lp_norm(&u, 4.0).unwrap() - PI.powf(0.25)).abs() < 1e-4);
        assert!(lp_norm(&u, 0.5).is_err());
    }

    #[test]
    fn h1_inner_basic_identities() {
        let g = RadialGrid::new(20.0, 512).unwrap();
        let u = g.sample(|r| (-r * r).exp());
        let v = g.sample(|r| (1.0 + r) * (-r).exp());
        assert!(rel(h1_inner(&u, &u).unwrap(), h1_norm_sq(&u)) < 1e-15);
        assert!((h1_inner(&u, &v).unwrap() - h1_inner(&v, &u).unwrap()).abs() < 1e-14);
        assert_eq!(h1_inner(&u, &g.zeros()).unwrap(), 0.0);
        let other = RadialGrid::new(20.0, 513).unwrap();
        assert_eq!(
            h1_inner(&u, &other.zeros()),
            Err(SolverError::GridMismatch)
        );
    }

    #[test]
    fn scale_transform_identity_and_errors() {
        let g = RadialGrid::new(10.0, 256).unwrap();
        let w = g.sample(|r| (-r).exp());
        assert_eq!(scale_transform(&w, 1.0).unwrap(), w);
        assert!(scale_transform(&w, 0.0).is_err());
        assert!(scale_transform(&w, -2.0).is_err());
    }

    #[test]
    fn scale_transform_scaling_laws() {
        let g = RadialGrid::new(20.0, 4096).unwrap();
        let w = g.sample(|r| (-r * r / 2.0).exp());
        let t = 2.0;
        let wt = scale_transform(&w, t).unwrap();
        assert!(rel(gradient_sq(&wt), t.powi(3) * gradient_sq(&w)) < 1e-3);
        assert!(rel(lp_power(&wt, 2.0), t * lp_power(&w, 2.0)) < 1e-3);
        let p = 3.0;
        assert!(rel(lp_power(&wt, p + 1.0), t.powf(2.0 * p - 1.0) * lp_power(&w, p + 1.0)) < 1e-3);
    }

    #[test]
    fn gram_solve_inverts_gram_apply() {
        let g = RadialGrid::new(5.0, 64).unwrap();
        let x = g.sample(|r| (1.0 - r / 5.0) * (-r).exp()).with_dirichlet();
        let mut b = vec![0.0; g.len()];
        g.apply_gram(x.values(), &mut b);
        let y = g.solve_gram(&b);
        for (a, b) in x.values().iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_is_second_order() {
        let err = |n| {
            let g = RadialGrid::new(40.0, n).unwrap();
            (integrate3d(&g.sample(|r| (-r).exp())) - 8.0 * PI).abs()
        };
        let (e1, e2) = (err(1024), err(2047));
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }
}
