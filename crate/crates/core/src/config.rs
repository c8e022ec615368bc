//! Flat `key = value` configuration files.
//!
//! Keys are the [`SystemParams`] field names plus `area_half_side_m`,
//! `bs_height_m`, `seed` and `drops`. Power-valued fields may instead be given
//! in dBm with a `_dbm` suffix and ratio-valued fields in dB with `_db`;
//! both are converted to linear units on load.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::scenario::{db_to_linear, dbm_to_watts, SystemParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub params: SystemParams,
    pub area_half_side_m: f64,
    pub bs_height_m: f64,
    pub seed: u64,
    pub drops: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            area_half_side_m: 25.0,
            bs_height_m: 10.0,
            seed: 1,
            drops: 200,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Unit {
    Watts,
    Ratio,
    Plain,
    Count,
}

const REAL_FIELDS: &[(&str, Unit)] = &[
    ("p_max", Unit::Watts),
    ("sigma2_c", Unit::Watts),
    ("sigma2_s", Unit::Watts),
    ("delta2", Unit::Watts),
    ("gamma", Unit::Ratio),
    ("eta", Unit::Ratio),
    ("e_min", Unit::Watts),
    ("rcs", Unit::Plain),
    ("kappa", Unit::Ratio),
    ("alpha", Unit::Plain),
    ("alpha_nlos", Unit::Plain),
    ("l0", Unit::Ratio),
    ("d0", Unit::Plain),
    ("zeta", Unit::Plain),
    ("tau", Unit::Watts),
    ("area_half_side_m", Unit::Plain),
    ("bs_height_m", Unit::Plain),
];

const COUNT_FIELDS: &[&str] = &[
    "n_tx",
    "n_rx",
    "n_nodes",
    "max_iters",
    "gr_samples",
    "chi_ramp_iters",
    "seed",
    "drops",
];

/// Resolves a raw key into its canonical field name and unit.
fn resolve_key(key: &str) -> Option<(&'static str, Unit, bool)> {
    if let Some(&name) = COUNT_FIELDS.iter().find(|&&n| n == key) {
        return Some((name, Unit::Count, false));
    }
    for &(name, unit) in REAL_FIELDS {
        if key == name {
            return Some((name, unit, false));
        }
        let suffixed = match unit {
            Unit::Watts => key.strip_suffix("_dbm"),
            Unit::Ratio => key.strip_suffix("_db"),
            _ => None,
        };
        if suffixed == Some(name) {
            return Some((name, unit, true));
        }
    }
    None
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError::Parse { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            let value = value.trim();
            let (name, unit, in_db) = resolve_key(key).ok_or_else(|| err(format!("unknown key `{key}`")))?;
            if !seen.insert(name) {
                return Err(err(format!("`{name}` given more than once")));
            }
            if unit == Unit::Count {
                let n: u64 = value
                    .parse()
                    .map_err(|_| err(format!("`{key}` expects a non-negative integer, got `{value}`")))?;
                cfg.set_count(name, n);
            } else {
                let x: f64 = value
                    .parse()
                    .map_err(|_| err(format!("`{key}` expects a number, got `{value}`")))?;
                if !x.is_finite() {
                    return Err(err(format!("`{key}` must be finite")));
                }
                let linear = match (unit, in_db) {
                    (Unit::Watts, true) => dbm_to_watts(x),
                    (Unit::Ratio, true) => db_to_linear(x),
                    _ => x,
                };
                cfg.set_real(name, linear);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.area_half_side_m > 0.0) {
            return Err(ConfigError::Invalid("area_half_side_m must be > 0".into()));
        }
        if !(self.bs_height_m > 0.0) {
            return Err(ConfigError::Invalid("bs_height_m must be > 0".into()));
        }
        if self.drops == 0 {
            return Err(ConfigError::Invalid("drops must be >= 1".into()));
        }
        Ok(())
    }

    fn set_count(&mut self, name: &str, n: u64) {
        let p = &mut self.params;
        match name {
            "n_tx" => p.n_tx = n as usize,
            "n_rx" => p.n_rx = n as usize,
            "n_nodes" => p.n_nodes = n as usize,
            "max_iters" => p.max_iters = n as usize,
            "gr_samples" => p.gr_samples = n as usize,
            "chi_ramp_iters" => p.chi_ramp_iters = n as usize,
            "seed" => self.seed = n,
            "drops" => self.drops = n as usize,
            _ => unreachable!("count field {name}"),
        }
    }

    fn set_real(&mut self, name: &str, x: f64) {
        let p = &mut self.params;
        match name {
            "p_max" => p.p_max = x,
            "sigma2_c" => p.sigma2_c = x,
            "sigma2_s" => p.sigma2_s = x,
            "delta2" => p.delta2 = x,
            "gamma" => p.gamma = x,
            "eta" => p.eta = x,
            "e_min" => p.e_min = x,
            "rcs" => p.rcs = x,
            "kappa" => p.kappa = x,
            "alpha" => p.alpha = x,
            "alpha_nlos" => p.alpha_nlos = x,
            "l0" => p.l0 = x,
            "d0" => p.d0 = x,
            "zeta" => p.zeta = x,
            "tau" => p.tau = x,
            "area_half_side_m" => self.area_half_side_m = x,
            "bs_height_m" => self.bs_height_m = x,
            _ => unreachable!("real field {name}"),
        }
    }

    /// Canonical text form with every value in linear units. Parsing the
    /// output reproduces `self` exactly.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let reals = [
            ("p_max", p.p_max),
            ("sigma2_c", p.sigma2_c),
            ("sigma2_s", p.sigma2_s),
            ("delta2", p.delta2),
            ("gamma", p.gamma),
            ("eta", p.eta),
            ("e_min", p.e_min),
            ("rcs", p.rcs),
            ("kappa", p.kappa),
            ("alpha", p.alpha),
            ("alpha_nlos", p.alpha_nlos),
            ("l0", p.l0),
            ("d0", p.d0),
            ("zeta", p.zeta),
            ("tau", p.tau),
            ("area_half_side_m", self.area_half_side_m),
            ("bs_height_m", self.bs_height_m),
        ];
        let counts = [
            ("n_tx", p.n_tx as u64),
            ("n_rx", p.n_rx as u64),
            ("n_nodes", p.n_nodes as u64),
            ("max_iters", p.max_iters as u64),
            ("gr_samples", p.gr_samples as u64),
            ("chi_ramp_iters", p.chi_ramp_iters as u64),
            ("seed", self.seed),
            ("drops", self.drops as u64),
        ];
        for (k, v) in counts {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (k, v) in reals {
            let _ = writeln!(out, "{k} = {v:e}");
        }
        out
    }
}
