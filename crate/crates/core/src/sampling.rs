//! Source profiles and random test fields.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{lp_norm, RadialField, RadialGrid};

/// Shape of the source term `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFamily {
    /// `g ∝ e^{−r²}`
    Gaussian,
    /// `g ∝ e^{−r}`
    Exponential,
}

impl SourceFamily {
    fn profile(self, r: f64) -> f64 {
        match self {
            SourceFamily::Gaussian => (-r * r).exp(),
            SourceFamily::Exponential => (-r).exp(),
        }
    }
}

impl fmt::Display for SourceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceFamily::Gaussian => "gaussian",
            SourceFamily::Exponential => "exponential",
        })
    }
}

impl FromStr for SourceFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(SourceFamily::Gaussian),
            "exponential" => Ok(SourceFamily::Exponential),
            other => Err(format!("unknown g family `{other}` (expected gaussian or exponential)")),
        }
    }
}

/// Samples of the family rescaled so that `|g|₂` equals `target` on `grid`.
pub fn source_field(grid: &RadialGrid, family: SourceFamily, target: f64) -> Result<RadialField> {
    if !(target >= 0.0 && target.is_finite()) {
        return Err(invalid("g_l2_target", format!("must be ≥ 0, got {target}")));
    }
    let shape = grid.sample(|r| family.profile(r));
    let norm = lp_norm(&shape, 2.0)?;
    Ok(shape.scaled(target / norm))
}

/// Random smooth radial field vanishing (with its slope) at `r_max`: a sum of
/// three Gaussian bumps with random centres, widths and signed amplitudes,
/// multiplied by the taper `(1 − (r/r_max)²)²`.
pub fn random_smooth_field<R: Rng + ?Sized>(grid: &RadialGrid, rng: &mut R) -> RadialField {
    let r_max = grid.r_max();
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.0..0.25 * r_max),
                rng.gen_range(0.5..0.2 * r_max.max(5.0)),
            )
        })
        .collect();
    grid.sample(|r| {
        let x = r / r_max;
        let taper = (1.0 - x * x).powi(2);
        taper
            * bumps
                .iter()
                .map(|&(a, c, s)| a * (-((r - c) / s).powi(2)).exp())
                .sum::<f64>()
    })
    .with_dirichlet()
}
