//! The energy `I_λ`, its μ-family `I_{λ,μ} = A − μB` and the cut-off variant
//! `I_{λ,M}`, together with their exact discrete gradients and Hessian-vector
//! products.
//!
//! Every functional is assembled from the same discrete building blocks
//! (Gram form, Coulomb energy, power integral, source pairing), so the
//! gradients below are the exact derivatives of the discrete energies. The
//! "strong-form residual" returned by [`gradient`] is the nodal derivative
//! divided by the shell volumes, i.e. the field `R` with
//! `⟨I′(u), v⟩ = ∫ R v dx` for every `v` vanishing at `r_max`.

use serde::Serialize;

use crate::error::{invalid, Result, SolverError};
use crate::grid::{lp_norm, RadialField, RadialGrid};
use crate::poisson::{nonlocal_energy_with, potential_of_density};

/// Parameters of the system: coupling λ, exponent p and the source `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    lambda: f64,
    p: f64,
    g: RadialField,
}

impl Problem {
    pub fn new(lambda: f64, p: f64, g: RadialField) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be ≥ 0, got {lambda}")));
        }
        if !(p > 1.0 && p < 5.0) {
            return Err(invalid("p", format!("must lie in (1, 5), got {p}")));
        }
        Ok(Self { lambda, p, g })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn source(&self) -> &RadialField {
        &self.g
    }

    pub fn grid(&self) -> &RadialGrid {
        self.g.grid()
    }

    pub fn g_l2(&self) -> f64 {
        lp_norm(&self.g, 2.0).expect("q = 2 is admissible")
    }

    /// Same data with another coupling.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.p, self.g.clone())
    }

    /// (G1): radial, nonnegative and not identically zero.
    pub fn check_source(&self) -> Result<()> {
        if let Some(i) = self.g.values().iter().position(|&v| v < 0.0) {
            return Err(SolverError::Hypothesis {
                hypothesis: "(G1)",
                detail: format!("g is negative at node {i}"),
            });
        }
        if self.g.values().iter().all(|&v| v == 0.0) {
            return Err(SolverError::Hypothesis {
                hypothesis: "(G1)",
                detail: "g vanishes identically".into(),
            });
        }
        Ok(())
    }
}

/// Itemized value of one of the functionals.
///
/// `total = h1_part + nonlocal_weight·nonlocal_part − power_weight·power_part − source_part`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    /// `½‖u‖²`
    pub h1_part: f64,
    /// `∫ φ_u u²`
    pub nonlocal_part: f64,
    /// `∫ |u|^{p+1}`
    pub power_part: f64,
    /// `∫ g u`
    pub source_part: f64,
    /// `λψ/4`, with ψ the active truncation factor (1 without cut-off).
    pub nonlocal_weight: f64,
    /// `μ/(p+1)`.
    pub power_weight: f64,
    pub total: f64,
}

/// Truncation radius of the cut-off functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSpec {
    m: f64,
}

impl CutoffSpec {
    pub fn new(m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(invalid("M", format!("truncation radius must be positive, got {m}")));
        }
        Ok(Self { m })
    }

    pub fn radius(&self) -> f64 {
        self.m
    }

    /// `ψ_M(u) = η(‖u‖²/M²)` as a function of `‖u‖²`.
    pub fn psi(&self, norm_sq: f64) -> f64 {
        eta(norm_sq / (self.m * self.m))
    }

    pub fn eta(&self, t: f64) -> Result<f64> {
        cutoff_eta(t)
    }

    pub fn eta_prime(&self, t: f64) -> Result<f64> {
        cutoff_eta_prime(t)
    }
}

fn smoothstep(x: f64) -> [f64; 3] {
    let x2 = x * x;
    [
        x2 * x * (10.0 - 15.0 * x + 6.0 * x2),
        30.0 * x2 * (x - 1.0) * (x - 1.0),
        60.0 * x * (1.0 - 3.0 * x + 2.0 * x2),
    ]
}

fn eta_jet(t: f64) -> [f64; 3] {
    if t <= 1.0 {
        [1.0, 0.0, 0.0]
    } else if t >= 2.0 {
        [0.0, 0.0, 0.0]
    } else {
        let [s, ds, dds] = smoothstep(t - 1.0);
        [1.0 - s, -ds, -dds]
    }
}

fn eta(t: f64) -> f64 {
    eta_jet(t)[0]
}

/// The cut-off profile: 1 on `[0,1]`, 0 on `[2,∞)`, and the quintic smoothstep
/// `1 − s(t−1)`, `s(x) = 6x⁵ − 15x⁴ + 10x³`, in between. `|η′| ≤ 15/8`.
pub fn cutoff_eta(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid("t", format!("cut-off argument must be ≥ 0, got {t}")));
    }
    Ok(eta(t))
}

pub fn cutoff_eta_prime(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid("t", format!("cut-off argument must be ≥ 0, got {t}")));
    }
    Ok(eta_jet(t)[1])
}

/// Which member of the family is being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// `I_λ`
    Full,
    /// `I_{λ,μ} = A − μB`, μ ∈ [½, 1]
    Mu(f64),
    /// `I_{λ,M}`
    Cutoff(CutoffSpec),
}

impl Functional {
    pub fn mu(mu: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&mu) {
            return Err(invalid("mu", format!("must lie in [1/2, 1], got {mu}")));
        }
        Ok(Self::Mu(mu))
    }

    fn power_coefficient(&self) -> f64 {
        match self {
            Functional::Mu(mu) => *mu,
            _ => 1.0,
        }
    }

    pub fn energy(&self, prob: &Problem, u: &RadialField) -> Result<EnergyBreakdown> {
        prob.g.same_grid(u)?;
        Ok(Evaluation::new(prob, *self, u).breakdown())
    }

    /// Strong-form residual field.
    pub fn gradient(&self, prob: &Problem, u: &RadialField) -> Result<RadialField> {
        prob.g.same_grid(u)?;
        let eval = Evaluation::new(prob, *self, u);
        Ok(eval.strong_residual())
    }

    pub(crate) fn evaluate<'a>(&self, prob: &'a Problem, u: &'a RadialField) -> Evaluation<'a> {
        Evaluation::new(prob, *self, u)
    }

    pub(crate) fn total(&self, prob: &Problem, u: &RadialField) -> f64 {
        Evaluation::new(prob, *self, u).total()
    }
}

/// All the pieces of one functional at one field, cached for the gradient and
/// Hessian.
pub(crate) struct Evaluation<'a> {
    prob: &'a Problem,
    functional: Functional,
    u: &'a RadialField,
    ku: Vec<f64>,
    phi: Vec<f64>,
    norm_sq: f64,
    nonlocal: f64,
    power: f64,
    source: f64,
    /// ψ, η′(q), η″(q) and `1/M²` for the cut-off; `[1, 0, 0, 0]` otherwise.
    cut: [f64; 4],
}

impl<'a> Evaluation<'a> {
    fn new(prob: &'a Problem, functional: Functional, u: &'a RadialField) -> Self {
        let grid = u.grid();
        let v = u.values();
        let mut ku = vec![0.0; v.len()];
        grid.apply_gram(v, &mut ku);
        let norm_sq: f64 = ku.iter().zip(v).map(|(a, b)| a * b).sum();
        let rho: Vec<f64> = v.iter().map(|x| x * x).collect();
        let phi = potential_of_density(grid, &rho);
        let phi_field = RadialField::from_vec_unchecked(grid, phi);
        let nonlocal = nonlocal_energy_with(u, &phi_field);
        let phi = phi_field.into_values();
        let q = prob.p + 1.0;
        let power = grid.quad(&v.iter().map(|x| x.abs().powf(q)).collect::<Vec<_>>());
        let source = grid.mass_form(prob.g.values(), v);
        let cut = match functional {
            Functional::Cutoff(spec) => {
                let inv_m2 = 1.0 / (spec.m * spec.m);
                let [e, de, dde] = eta_jet(norm_sq * inv_m2);
                [e, de, dde, inv_m2]
            }
            _ => [1.0, 0.0, 0.0, 0.0],
        };
        Self {
            prob,
            functional,
            u,
            ku,
            phi,
            norm_sq,
            nonlocal,
            power,
            source,
            cut,
        }
    }

    pub(crate) fn breakdown(&self) -> EnergyBreakdown {
        let h1_part = 0.5 * self.norm_sq;
        let nonlocal_weight = 0.25 * self.prob.lambda * self.cut[0];
        let power_weight = self.functional.power_coefficient() / (self.prob.p + 1.0);
        EnergyBreakdown {
            h1_part,
            nonlocal_part: self.nonlocal,
            power_part: self.power,
            source_part: self.source,
            nonlocal_weight,
            power_weight,
            total: h1_part + nonlocal_weight * self.nonlocal
                - power_weight * self.power
                - self.source,
        }
    }

    pub(crate) fn total(&self) -> f64 {
        self.breakdown().total
    }

    pub(crate) fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Factor multiplying `(−Δ + 1)u` in the gradient; differs from 1 only in
    /// the transition band of the cut-off.
    fn gram_factor(&self) -> f64 {
        1.0 + 0.5 * self.prob.lambda * self.cut[1] * self.nonlocal * self.cut[3]
    }

    /// Derivative with respect to the nodal values (boundary entry zeroed).
    pub(crate) fn nodal_gradient(&self) -> Vec<f64> {
        let grid = self.u.grid();
        let w = grid.cell_volumes();
        let v = self.u.values();
        let g = self.prob.g.values();
        let lambda_psi = self.prob.lambda * self.cut[0];
        let mu = self.functional.power_coefficient();
        let pm1 = self.prob.p - 1.0;
        let c = self.gram_factor();
        let mut out: Vec<f64> = (0..v.len())
            .map(|i| {
                let x = v[i];
                c * self.ku[i]
                    + w[i] * (lambda_psi * self.phi[i] * x - mu * x.abs().powf(pm1) * x - g[i])
            })
            .collect();
        out[grid.boundary()] = 0.0;
        out
    }

    pub(crate) fn strong_residual(&self) -> RadialField {
        let grid = self.u.grid();
        let values = self
            .nodal_gradient()
            .iter()
            .zip(grid.cell_volumes())
            .map(|(f, w)| f / w)
            .collect();
        RadialField::from_vec_unchecked(grid, values)
    }

    /// Hessian applied to `dir` (boundary entry of `dir` assumed zero, result's
    /// boundary entry zeroed).
    pub(crate) fn hessian_apply(&self, dir: &[f64]) -> Vec<f64> {
        let grid = self.u.grid();
        let w = grid.cell_volumes();
        let v = self.u.values();
        let lambda = self.prob.lambda;
        let [psi, deta, ddeta, inv_m2] = self.cut;
        let mu = self.functional.power_coefficient();
        let p = self.prob.p;

        let mut kd = vec![0.0; v.len()];
        grid.apply_gram(dir, &mut kd);
        let cross: Vec<f64> = v.iter().zip(dir).map(|(a, b)| 2.0 * a * b).collect();
        let dphi = potential_of_density(grid, &cross);

        let c = self.gram_factor();
        let mut out: Vec<f64> = (0..v.len())
            .map(|i| {
                c * kd[i]
                    + w[i]
                        * (lambda * psi * (self.phi[i] * dir[i] + v[i] * dphi[i])
                            - mu * p * v[i].abs().powf(p - 1.0) * dir[i])
            })
            .collect();

        if deta != 0.0 || ddeta != 0.0 {
            // dq(d) = 2⟨Ku, d⟩/M², dN(d) = 4⟨Wφu, d⟩
            let ku_d: f64 = self.ku.iter().zip(dir).map(|(a, b)| a * b).sum();
            let wphiu: Vec<f64> = (0..v.len()).map(|i| w[i] * self.phi[i] * v[i]).collect();
            let wphiu_d: f64 = wphiu.iter().zip(dir).map(|(a, b)| a * b).sum();
            let dq = 2.0 * ku_d * inv_m2;
            let dn = 4.0 * wphiu_d;
            let dc = 0.5 * lambda * inv_m2 * (ddeta * dq * self.nonlocal + deta * dn);
            let dpsi = deta * dq;
            for i in 0..v.len() {
                out[i] += dc * self.ku[i] + lambda * dpsi * wphiu[i];
            }
        }
        out[grid.boundary()] = 0.0;
        out
    }
}

/// `I_λ(u)`.
pub fn energy(prob: &Problem, u: &RadialField) -> Result<EnergyBreakdown> {
    Functional::Full.energy(prob, u)
}

/// Strong-form residual `−Δu + u + λφ_u u − |u|^{p−1}u − g`.
pub fn gradient(prob: &Problem, u: &RadialField) -> Result<RadialField> {
    Functional::Full.gradient(prob, u)
}

/// `I_{λ,μ}(u) = A(u) − μB(u)`.
pub fn energy_mu(prob: &Problem, mu: f64, u: &RadialField) -> Result<EnergyBreakdown> {
    Functional::mu(mu)?.energy(prob, u)
}

pub fn gradient_mu(prob: &Problem, mu: f64, u: &RadialField) -> Result<RadialField> {
    Functional::mu(mu)?.gradient(prob, u)
}

/// `I_{λ,M}(u)` with `ψ_M(u) = η(‖u‖²/M²)` on the nonlocal term.
pub fn energy_cutoff(prob: &Problem, cut: &CutoffSpec, u: &RadialField) -> Result<EnergyBreakdown> {
    Functional::Cutoff(*cut).energy(prob, u)
}

/// Strong-form residual of `I_{λ,M}`, including the chain-rule term
/// `(λ/2) η′(‖u‖²/M²) M⁻² (∫φ_u u²) (−Δ + 1)u`.
pub fn gradient_cutoff(prob: &Problem, cut: &CutoffSpec, u: &RadialField) -> Result<RadialField> {
    Functional::Cutoff(*cut).gradient(prob, u)
}

/// Mountain-pass geometry derived from the embedding constant `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryConstants {
    pub p: f64,
    pub sobolev: f64,
    /// Smallness threshold `C_p` on `|g|₂`.
    pub c_p: f64,
    /// Radius α of the ring.
    pub alpha: f64,
    /// Ring level `ρ = α(C_p − |g|₂)`.
    pub rho: f64,
    pub g_l2: f64,
    /// Whether `|g|₂ < C_p`.
    pub g3_holds: bool,
}

impl GeometryConstants {
    /// `h(t) = t/2 − t^p / ((p+1) S^{p+1})`, maximal at α with value `C_p`.
    pub fn ring_profile(&self, t: f64) -> f64 {
        0.5 * t - t.powf(self.p) / ((self.p + 1.0) * self.sobolev.powf(self.p + 1.0))
    }
}

pub fn geometry_constants(p: f64, sobolev: f64, g_l2: f64) -> Result<GeometryConstants> {
    if !(p > 1.0 && p < 5.0) {
        return Err(invalid("p", format!("must lie in (1, 5), got {p}")));
    }
    if !(sobolev > 0.0 && sobolev.is_finite()) {
        return Err(invalid("S", format!("must be positive, got {sobolev}")));
    }
    let alpha = ((p + 1.0) * sobolev.powf(p + 1.0) / (2.0 * p)).powf(1.0 / (p - 1.0));
    let c_p = (p - 1.0) / (2.0 * p) * alpha;
    Ok(GeometryConstants {
        p,
        sobolev,
        c_p,
        alpha,
        rho: alpha * (c_p - g_l2),
        g_l2,
        g3_holds: g_l2 < c_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn exp_problem(lambda: f64, p: f64) -> (Problem, RadialField) {
        let grid = RadialGrid::new(40.0, 4096).unwrap();
        let prob = Problem::new(lambda, p, grid.zeros()).unwrap();
        let u = grid.sample(|r| (-0.5 * r).exp());
        (prob, u)
    }

    #[test]
    fn problem_validation() {
        let g = RadialGrid::new(10.0, 64).unwrap();
        assert!(Problem::new(1.0, 5.0, g.zeros()).is_err());
        assert!(Problem::new(1.0, 1.0, g.zeros()).is_err());
        assert!(Problem::new(-0.1, 3.0, g.zeros()).is_err());
        let prob = Problem::new(1.0, 3.0, g.zeros()).unwrap();
        assert!(prob.check_source().is_err());
        let prob = Problem::new(1.0, 3.0, g.sample(|r| -(-r).exp())).unwrap();
        assert!(prob.check_source().is_err());
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let (prob, _) = exp_problem(1.0, 3.0);
        let e = energy(&prob, &prob.grid().zeros()).unwrap();
        assert_eq!(e.total, 0.0);
        assert_eq!(e.h1_part, 0.0);
        assert_eq!(e.nonlocal_part, 0.0);
        assert_eq!(e.power_part, 0.0);
    }

    #[test]
    fn energy_closed_form() {
        let (prob, u) = exp_problem(1.0, 3.0);
        let e = energy(&prob, &u).unwrap();
        assert!(((e.total - 6.0 * PI) / (6.0 * PI)).abs() < 1e-3);
        let e_half = energy_mu(&prob, 0.5, &u).unwrap();
        assert!(((e_half.total - 6.125 * PI) / (6.125 * PI)).abs() < 1e-3);
        assert_eq!(energy_mu(&prob, 1.0, &u).unwrap(), e);
        assert!(energy_mu(&prob, 0.4, &u).is_err());
        assert!(energy_mu(&prob, 1.01, &u).is_err());
    }

    #[test]
    fn small_multiple_along_source_is_negative() {
        let grid = RadialGrid::new(20.0, 1024).unwrap();
        let prob = Problem::new(1.0, 3.0, grid.sample(|r| (-r).exp())).unwrap();
        let v = grid.sample(|r| (-r).exp()).with_dirichlet();
        assert!(energy(&prob, &v.scaled(1e-3)).unwrap().total < 0.0);
    }

    #[test]
    fn gradient_at_zero_is_minus_source() {
        let grid = RadialGrid::new(20.0, 256).unwrap();
        let g = grid.sample(|r| (-r * r).exp());
        let prob = Problem::new(1.0, 3.0, g.clone()).unwrap();
        let res = gradient(&prob, &grid.zeros()).unwrap();
        for (i, (a, b)) in res.values().iter().zip(g.values()).enumerate() {
            if i != grid.boundary() {
                assert!((a + b).abs() < 1e-15);
            }
        }
        let cut = CutoffSpec::new(1.0).unwrap();
        assert_eq!(gradient_cutoff(&prob, &cut, &grid.zeros()).unwrap(), res);
    }

    #[test]
    fn eta_profile() {
        assert_eq!(cutoff_eta(0.5).unwrap(), 1.0);
        assert_eq!(cutoff_eta(1.0).unwrap(), 1.0);
        assert_eq!(cutoff_eta(3.0).unwrap(), 0.0);
        assert_eq!(cutoff_eta(2.0).unwrap(), 0.0);
        assert!((cutoff_eta(1.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(cutoff_eta(-0.1).is_err());
        let mut max_slope: f64 = 0.0;
        for k in 0..=4000 {
            let t = 3.0 * k as f64 / 4000.0;
            let e = cutoff_eta(t).unwrap();
            assert!((0.0..=1.0).contains(&e));
            max_slope = max_slope.max(cutoff_eta_prime(t).unwrap().abs());
        }
        assert!(max_slope <= 2.0);
        assert!((max_slope - 1.875).abs() < 1e-6);
    }

    #[test]
    fn eta_derivative_matches_finite_differences() {
        for &t in &[1.1, 1.3, 1.5, 1.77, 1.95] {
            let eps = 1e-6;
            let fd = (eta(t + eps) - eta(t - eps)) / (2.0 * eps);
            assert!((fd - cutoff_eta_prime(t).unwrap()).abs() < 1e-8);
            let fd2 = (eta_jet(t + eps)[1] - eta_jet(t - eps)[1]) / (2.0 * eps);
            assert!((fd2 - eta_jet(t)[2]).abs() < 1e-6);
        }
    }

    #[test]
    fn cutoff_regions() {
        let (prob, u) = exp_problem(1.0, 3.0);
        let norm = crate::grid::h1_norm(&u);
        let inside = CutoffSpec::new(norm * 1.01).unwrap();
        assert_eq!(energy_cutoff(&prob, &inside, &u).unwrap(), energy(&prob, &u).unwrap());
        assert_eq!(
            gradient_cutoff(&prob, &inside, &u).unwrap(),
            gradient(&prob, &u).unwrap()
        );
        let outside = CutoffSpec::new(norm / 2f64.sqrt()).unwrap();
        let e = energy_cutoff(&prob, &outside, &u).unwrap();
        let plain = energy(&prob, &u).unwrap();
        assert_eq!(e.nonlocal_weight, 0.0);
        let expected = plain.h1_part - plain.power_part / 4.0 - plain.source_part;
        assert!((e.total - expected).abs() < 1e-12 * expected.abs());
        assert!(CutoffSpec::new(0.0).is_err());
    }

    #[test]
    fn geometry_examples() {
        let g = geometry_constants(3.0, 1.0, 0.0).unwrap();
        assert!((g.alpha - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((g.c_p - (2.0f64 / 3.0).sqrt() / 3.0).abs() < 1e-12);
        let g = geometry_constants(2.0, 1.0, 0.0).unwrap();
        assert!((g.alpha - 0.75).abs() < 1e-12);
        assert!((g.c_p - 0.1875).abs() < 1e-12);
        let g = geometry_constants(2.0, 1.0, 0.2).unwrap();
        assert!(!g.g3_holds && g.rho < 0.0);
    }
}
