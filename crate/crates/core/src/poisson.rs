//! Newtonian potential `φ_u = (4π|x|)⁻¹ * u²` for radial densities.
//!
//! For a radial density ρ the potential splits into an interior and an
//! exterior shell contribution,
//!
//! ```text
//! φ(r) = (1/r) ∫₀^r s² ρ(s) ds + ∫_r^∞ s ρ(s) ds,
//! ```
//!
//! i.e. the kernel `1/max(r, s)` against `s² ρ(s) ds`. Both pieces are prefix /
//! suffix sums over the quadrature weights, so one evaluation is O(n). The
//! discrete kernel `K_ij = 1/max(r_i, r_j)` (with `K_00 = 5/h`) is symmetric,
//! so `Σ w_i φ[ρ]_i σ_i = Σ w_i φ[σ]_i ρ_i` holds exactly and `λ φ_u u` is the
//! exact derivative of the discrete nonlocal energy. It is also the exact
//! inverse of the grid's flux-form Laplacian: `−Δ_h φ = ρ` holds at every
//! node below `r_max` up to rounding, with the exterior monopole tail
//! `φ = Q/r` closing the system at `r_max`.

use std::f64::consts::PI;
use std::ops::Deref;

use crate::grid::{integrate3d, RadialField, RadialGrid};

/// Values of `φ_u` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField(RadialField);

impl PotentialField {
    pub fn into_field(self) -> RadialField {
        self.0
    }
}

impl Deref for PotentialField {
    type Target = RadialField;

    fn deref(&self) -> &RadialField {
        &self.0
    }
}

/// Potential generated by an arbitrary charge density `rho` (samples of `−Δφ`).
pub(crate) fn potential_of_density(grid: &RadialGrid, rho: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let r = grid.nodes();
    let w = grid.cell_volumes();
    let h = grid.spacing();

    let mut phi = vec![0.0; n];
    // exterior[i] = Σ_{j>i} w_j ρ_j / r_j
    let mut exterior = 0.0;
    for i in (0..n).rev() {
        phi[i] = exterior;
        if i > 0 {
            exterior += w[i] * rho[i] / r[i];
        }
    }
    let mut interior = 0.0;
    for i in 0..n {
        interior += w[i] * rho[i];
        if i == 0 {
            // Diagonal entry fixed by the flux condition across the first edge.
            phi[0] += w[0] * rho[0] * 5.0 / h;
        } else {
            phi[i] += interior / r[i];
        }
    }
    let scale = 1.0 / (4.0 * PI);
    phi.iter_mut().for_each(|p| *p *= scale);
    phi
}

/// `φ_u` solving `−Δφ = u²`, with `u` taken as zero beyond `r_max`.
pub fn newtonian_potential(u: &RadialField) -> PotentialField {
    let rho: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    let phi = potential_of_density(u.grid(), &rho);
    PotentialField(RadialField::from_vec_unchecked(u.grid(), phi))
}

/// `∫ φ_u u² dx` (the nonlocal integral without the `λ/4` factor).
pub fn nonlocal_energy(u: &RadialField) -> f64 {
    let phi = newtonian_potential(u);
    nonlocal_energy_with(u, &phi)
}

pub(crate) fn nonlocal_energy_with(u: &RadialField, phi: &RadialField) -> f64 {
    u.values()
        .iter()
        .zip(phi.values())
        .zip(u.grid().cell_volumes())
        .map(|((v, p), w)| w * p * v * v)
        .sum()
}

/// `∫ φ_u v² dx`, the mixed Coulomb pairing of two densities.
pub fn coulomb_pairing(u: &RadialField, v: &RadialField) -> f64 {
    let phi = newtonian_potential(u);
    let prod = RadialField::from_vec_unchecked(
        v.grid(),
        phi.values()
            .iter()
            .zip(v.values())
            .map(|(p, x)| p * x * x)
            .collect(),
    );
    integrate3d(&prod)
}

/// Max-norm of `Δ_h φ + u²` over the nodes below `r_max`, with the grid's
/// flux-form Laplacian. The potential solves this system exactly, so the
/// value only reflects rounding.
pub fn poisson_residual(u: &RadialField, phi: &RadialField) -> f64 {
    let grid = u.grid();
    let n = grid.len();
    let mut s_phi = vec![0.0; n];
    grid.apply_stiffness(phi.values(), &mut s_phi);
    let mut worst: f64 = 0.0;
    for i in 0..n - 1 {
        let lap = -s_phi[i] / grid.cell_volumes()[i];
        let rho = u.values()[i] * u.values()[i];
        worst = worst.max((lap + rho).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    fn closed_form(r: f64) -> f64 {
        // u = e^{-r/2}: A(r) = 2 − e^{-r}(r² + 2r + 2), B(r) = e^{-r}(r + 1).
        if r == 0.0 {
            return 1.0;
        }
        let a = 2.0 - (-r).exp() * (r * r + 2.0 * r + 2.0);
        let b = (-r).exp() * (r + 1.0);
        a / r + b
    }

    fn reference_grid() -> RadialGrid {
        RadialGrid::new(40.0, 4096).unwrap()
    }

    #[test]
    fn zero_density_gives_zero_potential() {
        let g = reference_grid();
        let phi = newtonian_potential(&g.zeros());
        assert!(phi.values().iter().all(|&p| p == 0.0));
        assert_eq!(nonlocal_energy(&g.zeros()), 0.0);
    }

    #[test]
    fn matches_closed_form_at_sample_points() {
        let g = reference_grid();
        let u = g.sample(|r| (-0.5 * r).exp());
        let phi = newtonian_potential(&u);
        assert!((phi.values()[0] - 1.0).abs() < 1e-4);
        for r in [1.0, 2.0] {
            assert!((phi.eval(r) - closed_form(r)).abs() < 1e-4, "r = {r}");
        }
        assert!((closed_form(1.0) - 0.896362).abs() < 1e-6);
        assert!((closed_form(2.0) - 0.729329).abs() < 1e-6);
        assert!((30.0 * phi.eval(30.0) - 2.0).abs() < 1e-3);
    }

    #[test]
    fn nonlocal_energy_closed_form_and_homogeneity() {
        let g = reference_grid();
        let u = g.sample(|r| (-0.5 * r).exp());
        let e = nonlocal_energy(&u);
        assert!(((e - 5.0 * PI) / (5.0 * PI)).abs() < 1e-3);
        let e2 = nonlocal_energy(&u.scaled(2.0));
        assert!(((e2 - 16.0 * e) / (16.0 * e)).abs() < 1e-10);
    }

    #[test]
    fn potential_is_quadratic_in_u() {
        let g = RadialGrid::new(20.0, 512).unwrap();
        let u = g.sample(|r| (1.0 + r) * (-r).exp());
        let a = newtonian_potential(&u);
        let b = newtonian_potential(&u.scaled(3.0));
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((9.0 * x - y).abs() <= 1e-14 * y.abs());
        }
    }

    #[test]
    fn solves_discrete_poisson_equation() {
        for n in [1024, 2047] {
            let g = RadialGrid::new(40.0, n).unwrap();
            let u = g.sample(|r| (-0.5 * r).exp());
            let phi = newtonian_potential(&u);
            let res = poisson_residual(&u, &phi);
            assert!(res < 1e-9, "n = {n}: {res}");
        }
    }

    #[test]
    fn potential_error_is_second_order() {
        let error = |n| {
            let g = RadialGrid::new(40.0, n).unwrap();
            let u = g.sample(|r| (-0.5 * r).exp());
            let phi = newtonian_potential(&u);
            g.nodes()
                .iter()
                .zip(phi.values())
                .map(|(&r, &p)| (p - closed_form(r)).abs())
                .fold(0.0, f64::max)
        };
        let coarse = error(1024);
        let fine = error(2047);
        assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
    }
}
