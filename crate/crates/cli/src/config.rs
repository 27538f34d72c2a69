//! `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use sm_core::SourceFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Solve,
    Sweep,
    Verify,
    Sobolev,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "solve" => Ok(Mode::Solve),
            "sweep" => Ok(Mode::Sweep),
            "verify" => Ok(Mode::Verify),
            "sobolev" => Ok(Mode::Sobolev),
            _ => Err(format!("expected solve, sweep, verify or sobolev, got `{s}`")),
        }
    }
}

/// Target for `|g|₂`, either absolute or relative to `C_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SourceTarget {
    Absolute(f64),
    FractionOfCp(f64),
}

impl SourceTarget {
    pub fn resolve(self, c_p: f64) -> f64 {
        match self {
            SourceTarget::Absolute(v) => v,
            SourceTarget::FractionOfCp(f) => f * c_p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub lambda: f64,
    pub p: f64,
    pub g_family: SourceFamily,
    pub g_l2_target: SourceTarget,
    pub r_max: f64,
    pub n: usize,
    pub tol_grad: f64,
    pub max_iter: usize,
    pub path_nodes: usize,
    pub mu_points: usize,
    pub seed: u64,
    pub cutoff_m0: Option<f64>,
    pub lambda_list: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "`{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

const KEYS: [&str; 14] = [
    "mode",
    "lambda",
    "p",
    "g_family",
    "g_l2_target",
    "r_max",
    "n",
    "tol_grad",
    "max_iter",
    "path_nodes",
    "mu_points",
    "seed",
    "cutoff_m0",
    "lambda_list",
];

struct Entry {
    line: usize,
    value: String,
}

struct Fields(BTreeMap<&'static str, Entry>);

impl Fields {
    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.0.get(key).map(|e| e.line),
            field: Some(key.to_string()),
            message: message.into(),
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|err| self.err(key, format!("cannot parse `{}`: {err}", e.value))),
        }
    }

    fn require<T: FromStr>(&self, key: &str, mode: Mode) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| ConfigError {
            line: None,
            field: Some(key.to_string()),
            message: format!("required for mode {mode:?}").to_lowercase(),
        })
    }
}

fn parse_target(text: &str) -> Result<SourceTarget, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let fraction = ["*C_p", "·C_p", "C_p"]
        .iter()
        .find_map(|suffix| compact.strip_suffix(suffix));
    match fraction {
        Some(f) => f
            .parse()
            .map(SourceTarget::FractionOfCp)
            .map_err(|e| format!("cannot parse fraction `{f}`: {e}")),
        None => compact
            .parse()
            .map(SourceTarget::Absolute)
            .map_err(|e| format!("cannot parse `{text}`: {e}")),
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("cannot parse `{s}`: {e}")))
        .collect()
}

fn check(ok: bool, fields: &Fields, key: &str, msg: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(fields.err(key, msg()))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError {
                line: Some(line),
                field: None,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim();
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            return Err(ConfigError {
                line: Some(line),
                field: Some(key.to_string()),
                message: "unknown key".into(),
            });
        };
        if let Some(prev) = map.insert(known, Entry { line, value: value.trim().to_string() }) {
            return Err(ConfigError {
                line: Some(line),
                field: Some(key.to_string()),
                message: format!("duplicate key (first set on line {})", prev.line),
            });
        }
    }
    let f = Fields(map);

    let mode: Mode = f.get("mode")?.ok_or_else(|| ConfigError {
        line: None,
        field: Some("mode".into()),
        message: "missing mode".into(),
    })?;

    let p: f64 = f.require("p", mode)?;
    check(p > 1.0 && p < 5.0, &f, "p", || format!("must lie in (1, 5), got {p}"))?;

    let needs_problem = mode != Mode::Sobolev;
    let lambda: f64 = if matches!(mode, Mode::Solve | Mode::Verify) {
        f.require("lambda", mode)?
    } else {
        f.get("lambda")?.unwrap_or(0.0)
    };
    check(lambda >= 0.0 && lambda.is_finite(), &f, "lambda", || {
        format!("must be finite and ≥ 0, got {lambda}")
    })?;

    let g_family: SourceFamily = if needs_problem {
        f.require("g_family", mode)?
    } else {
        f.get("g_family")?.unwrap_or(SourceFamily::Exponential)
    };

    let g_l2_target = match f.0.get("g_l2_target") {
        Some(e) => parse_target(&e.value).map_err(|m| f.err("g_l2_target", m))?,
        None if needs_problem => {
            return Err(f.err("g_l2_target", format!("required for mode {mode:?}").to_lowercase()))
        }
        None => SourceTarget::Absolute(0.0),
    };
    match g_l2_target {
        SourceTarget::Absolute(v) => check(v >= 0.0 && v.is_finite(), &f, "g_l2_target", || {
            format!("must be finite and ≥ 0, got {v}")
        })?,
        SourceTarget::FractionOfCp(fr) => check((0.0..1.0).contains(&fr), &f, "g_l2_target", || {
            format!("fraction of C_p must lie in [0, 1) for hypothesis (G3) |g|₂ < C_p, got {fr}")
        })?,
    }

    let r_max: f64 = f.get("r_max")?.unwrap_or(20.0);
    check(r_max > 0.0 && r_max.is_finite(), &f, "r_max", || format!("must be positive, got {r_max}"))?;
    let n: usize = f.get("n")?.unwrap_or(2048);
    check(n >= 16, &f, "n", || format!("need at least 16 nodes, got {n}"))?;
    let tol_grad: f64 = f.get("tol_grad")?.unwrap_or(1e-6);
    check(tol_grad > 0.0, &f, "tol_grad", || format!("must be positive, got {tol_grad}"))?;
    let max_iter: usize = f.get("max_iter")?.unwrap_or(20_000);
    check(max_iter >= 1, &f, "max_iter", || "must be at least 1".into())?;
    let path_nodes: usize = f.get("path_nodes")?.unwrap_or(41);
    check(path_nodes >= 3, &f, "path_nodes", || format!("need at least 3, got {path_nodes}"))?;
    let mu_points: usize = f.get("mu_points")?.unwrap_or(11);
    check(mu_points >= 2, &f, "mu_points", || format!("need at least 2, got {mu_points}"))?;
    let seed: u64 = f.get("seed")?.unwrap_or(0);
    let cutoff_m0: Option<f64> = f.get("cutoff_m0")?;
    if let Some(m) = cutoff_m0 {
        check(m > 0.0 && m.is_finite(), &f, "cutoff_m0", || format!("must be positive, got {m}"))?;
    }

    let lambda_list = match f.0.get("lambda_list") {
        Some(e) => parse_list(&e.value).map_err(|m| f.err("lambda_list", m))?,
        None if mode == Mode::Sweep => return Err(f.err("lambda_list", "required for mode sweep")),
        None => Vec::new(),
    };
    if mode == Mode::Sweep {
        check(!lambda_list.is_empty(), &f, "lambda_list", || "must not be empty".into())?;
        check(lambda_list.iter().all(|l| *l >= 0.0 && l.is_finite()), &f, "lambda_list", || {
            "entries must be finite and ≥ 0".into()
        })?;
        check(lambda_list.windows(2).all(|w| w[0] < w[1]), &f, "lambda_list", || {
            "entries must be strictly increasing".into()
        })?;
    }

    Ok(RunConfig {
        mode,
        lambda,
        p,
        g_family,
        g_l2_target,
        r_max,
        n,
        tol_grad,
        max_iter,
        path_nodes,
        mu_points,
        seed,
        cutoff_m0,
        lambda_list,
    })
}
