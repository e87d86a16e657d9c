//! Sweep configuration files.
//!
//! Flat `key = value` lines; `#` starts a comment. Numeric lists are written
//! `a,b,c` and inclusive arithmetic ranges `lo:hi:step`; the two forms can be
//! mixed (`0.1,0.5:0.7:0.1`).
//!
//! Keys: `type` (`equity`, `debt` or `both`), `fractions` (used for both
//! fraction grids, all pairs), `fractions12`, `fractions21`, `d_over_a`,
//! `sigma_sq`, `n`, `seed`, `rounding`, `a` (expected exogenous assets).

use std::fmt;
use std::path::Path;

#[allow(clippy::approx_constant)]
pub const DEFAULT_SIGMA_SQ_GRID: [f64; 12] = [
    0.00995, 0.22314, 0.44629, 0.69315, 1.0, 1.17865, 1.60944, 1.98100, 2.30259, 3.25810,
    4.04743, 4.61512,
];

pub const DEFAULT_N_PER_CELL: usize = 10_000;
pub const DEFAULT_ROUNDING: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepType {
    Equity,
    Debt,
}

impl SweepType {
    pub fn name(self) -> &'static str {
        match self {
            SweepType::Equity => "equity",
            SweepType::Debt => "debt",
        }
    }

    pub fn parse(s: &str) -> Option<Vec<SweepType>> {
        match s {
            "equity" => Some(vec![SweepType::Equity]),
            "debt" => Some(vec![SweepType::Debt]),
            "both" => Some(vec![SweepType::Equity, SweepType::Debt]),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub xos_types: Vec<SweepType>,
    /// `(M12, M21)` pairs.
    pub fraction_grid: Vec<(f64, f64)>,
    pub d_over_a_grid: Vec<f64>,
    pub sigma_sq_grid: Vec<f64>,
    pub n_per_cell: usize,
    pub seed: u64,
    pub rounding: u32,
    /// Expected exogenous assets of each firm.
    pub asset_mean: f64,
}

/// Inclusive arithmetic grid, with values cleaned of accumulated rounding.
pub fn arithmetic_range(lo: f64, hi: f64, step: f64) -> Option<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return None;
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return None;
    }
    Some((0..count).map(|k| clean(lo + k as f64 * step)).collect())
}

fn clean(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

fn pairs(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        let fractions = arithmetic_range(0.1, 0.9, 0.1).unwrap();
        Self {
            xos_types: vec![SweepType::Equity, SweepType::Debt],
            fraction_grid: pairs(&fractions, &fractions),
            d_over_a_grid: arithmetic_range(0.1, 3.0, 0.1).unwrap(),
            sigma_sq_grid: DEFAULT_SIGMA_SQ_GRID.to_vec(),
            n_per_cell: DEFAULT_N_PER_CELL,
            seed: crate::harness::DEFAULT_SEED,
            rounding: DEFAULT_ROUNDING,
            asset_mean: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: Some(line),
        message: message.into(),
    }
}

fn parse_list(value: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    for item in value.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(err(line, "empty list element"));
        }
        if item.contains(':') {
            let parts: Vec<&str> = item.split(':').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(err(line, format!("range `{item}` must be lo:hi:step")));
            }
            let nums: Vec<f64> = parts
                .iter()
                .map(|p| p.parse::<f64>().map_err(|_| err(line, format!("`{p}` is not a number"))))
                .collect::<Result<_, _>>()?;
            out.extend(
                arithmetic_range(nums[0], nums[1], nums[2])
                    .ok_or_else(|| err(line, format!("invalid range `{item}`")))?,
            );
        } else {
            out.push(item.parse::<f64>().map_err(|_| err(line, format!("`{item}` is not a number")))?);
        }
    }
    Ok(out)
}

fn parse_scalar<T: std::str::FromStr>(value: &str, line: usize, what: &str) -> Result<T, ConfigError> {
    value
        .parse::<T>()
        .map_err(|_| err(line, format!("`{value}` is not a valid {what}")))
}

impl SweepConfig {
    /// Parses a configuration; keys not given keep their default.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SweepConfig::default();
        let mut fractions: Option<(Vec<f64>, usize)> = None;
        let mut f12: Option<(Vec<f64>, usize)> = None;
        let mut f21: Option<(Vec<f64>, usize)> = None;
        let mut seen = std::collections::HashMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(err(line, format!("duplicate key `{key}` (first set on line {prev})")));
            }
            match key {
                "type" => {
                    cfg.xos_types = SweepType::parse(value)
                        .ok_or_else(|| err(line, format!("type must be equity, debt or both, got `{value}`")))?
                }
                "fractions" => fractions = Some((parse_list(value, line)?, line)),
                "fractions12" => f12 = Some((parse_list(value, line)?, line)),
                "fractions21" => f21 = Some((parse_list(value, line)?, line)),
                "d_over_a" => {
                    cfg.d_over_a_grid = parse_list(value, line)?;
                    check_grid(&cfg.d_over_a_grid, line, "d_over_a", |v| v > 0.0)?;
                }
                "sigma_sq" => {
                    cfg.sigma_sq_grid = parse_list(value, line)?;
                    check_grid(&cfg.sigma_sq_grid, line, "sigma_sq", |v| v > 0.0)?;
                }
                "n" => {
                    cfg.n_per_cell = parse_scalar(value, line, "sample size")?;
                    if cfg.n_per_cell == 0 {
                        return Err(err(line, "n must be at least 1"));
                    }
                }
                "seed" => cfg.seed = parse_scalar(value, line, "seed")?,
                "rounding" => {
                    cfg.rounding = parse_scalar(value, line, "number of decimals")?;
                    if cfg.rounding > 15 {
                        return Err(err(line, "rounding must be at most 15 decimals"));
                    }
                }
                "a" => {
                    cfg.asset_mean = parse_scalar(value, line, "number")?;
                    if !(cfg.asset_mean > 0.0) || !cfg.asset_mean.is_finite() {
                        return Err(err(line, "a must be positive"));
                    }
                }
                other => return Err(err(line, format!("unknown key `{other}`"))),
            }
        }

        let frac_ok = |v: f64| (0.0..1.0).contains(&v);
        match (fractions, f12, f21) {
            (Some((f, line)), None, None) => {
                check_grid(&f, line, "fractions", frac_ok)?;
                cfg.fraction_grid = pairs(&f, &f);
            }
            (None, Some((a, la)), Some((b, lb))) => {
                check_grid(&a, la, "fractions12", frac_ok)?;
                check_grid(&b, lb, "fractions21", frac_ok)?;
                cfg.fraction_grid = pairs(&a, &b);
            }
            (None, None, None) => {}
            (Some((_, line)), _, _) => {
                return Err(err(line, "use either `fractions` or both `fractions12` and `fractions21`"))
            }
            (None, Some((_, line)), None) | (None, None, Some((_, line))) => {
                return Err(err(line, "`fractions12` and `fractions21` must be given together"))
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn cell_count(&self) -> usize {
        self.xos_types.len() * self.fraction_grid.len() * self.d_over_a_grid.len() * self.sigma_sq_grid.len()
    }
}

fn check_grid(values: &[f64], line: usize, key: &str, ok: impl Fn(f64) -> bool) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(err(line, format!("{key} grid is empty")));
    }
    if let Some(v) = values.iter().find(|&&v| !ok(v) || !v.is_finite()) {
        return Err(err(line, format!("{key} value {v} out of range")));
    }
    Ok(())
}
