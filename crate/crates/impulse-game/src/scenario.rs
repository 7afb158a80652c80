//! Named parameter sets and a flat `key=value` config format.

use crate::model::{GameParams, ParamError};

/// Reference thresholds a scenario is expected to reproduce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectedEquilibrium {
    Type1 { x1_bar: f64, x1_star: f64, x2_bar: f64 },
    Type2 { x1_bar: f64, x2_bar: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: GameParams,
    pub expected: Option<ExpectedEquilibrium>,
}

pub const BUILTIN_NAMES: [&str; 4] = ["type1-A", "type1-B", "type2-A", "type2-B"];

/// Look up one of the built-in scenarios; `None` for unknown names.
pub fn builtin(name: &str) -> Option<Scenario> {
    // (r, sigma, c, d, lambda, gamma, a, b, s, q)
    let (p, expected) = match name {
        "type1-A" => (
            GameParams::new(0.01, 5.0, 500.0, 100.0, 20.0, 40.0, 0.0, 0.0, 1.0, 5.0),
            ExpectedEquilibrium::Type1 { x1_bar: -31.11, x1_star: 16.95, x2_bar: 34.84 },
        ),
        "type1-B" => (
            GameParams::new(0.01, 1.5, 50.0, 150.0, 10.0, 15.0, 2.0, 8.0, 10.0, 10.0),
            ExpectedEquilibrium::Type1 { x1_bar: 4.95, x1_star: 14.26, x2_bar: 18.18 },
        ),
        "type2-A" => (
            GameParams::new(0.01, 5.0, 100.0, 100.0, 25.0, 10.0, 24.0, 9.0, 45.0, 0.0),
            ExpectedEquilibrium::Type2 { x1_bar: 22.56, x2_bar: 32.68 },
        ),
        "type2-B" => (
            GameParams::new(0.01, 1.5, 150.0, 125.0, 80.0, 25.0, 70.0, 15.0, 10.0, 15.0),
            ExpectedEquilibrium::Type2 { x1_bar: 14.27, x2_bar: 25.72 },
        ),
        _ => return None,
    };
    Some(Scenario {
        name: name.to_string(),
        params: p.expect("builtin parameters are valid"),
        expected: Some(expected),
    })
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key=value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` is not a number: `{value}`")]
    BadNumber { line: usize, key: String, value: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error(transparent)]
    Param(#[from] ParamError),
}

const PARAM_KEYS: [&str; 10] = ["r", "sigma", "c", "d", "lambda", "gamma", "a", "b", "s", "q"];

/// Extra (non-model) settings a config file may carry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConfigExtras {
    pub seed: Option<u64>,
    pub n_paths: Option<u64>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub grid: Option<u64>,
}

/// Parse the flat `key=value` config format: one pair per line, `#`
/// comments, blank lines ignored.
pub fn parse_config(text: &str) -> Result<(GameParams, ConfigExtras), ConfigError> {
    let mut vals = std::collections::HashMap::new();
    let mut extras = ConfigExtras::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Malformed {
            line,
            text: content.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let num: f64 = value.parse().map_err(|_| ConfigError::BadNumber {
            line,
            key: key.to_string(),
            value: value.to_string(),
        })?;
        match key {
            _ if PARAM_KEYS.contains(&key) => {
                if vals.insert(key.to_string(), num).is_some() {
                    return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
                }
            }
            "seed" => extras.seed = Some(num as u64),
            "n_paths" => extras.n_paths = Some(num as u64),
            "dt" => extras.dt = Some(num),
            "horizon" => extras.horizon = Some(num),
            "grid" => extras.grid = Some(num as u64),
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        }
    }
    let get = |k: &'static str| vals.get(k).copied().ok_or(ConfigError::MissingKey(k));
    let params = GameParams::new(
        get("r")?,
        get("sigma")?,
        get("c")?,
        get("d")?,
        get("lambda")?,
        get("gamma")?,
        get("a")?,
        get("b")?,
        get("s")?,
        get("q")?,
    )?;
    Ok((params, extras))
}

/// Render params (and any set extras) back to the config format.
pub fn dump_config(p: &GameParams, extras: &ConfigExtras) -> String {
    let mut out = String::new();
    for (k, v) in [
        ("r", p.r()),
        ("sigma", p.sigma()),
        ("c", p.c()),
        ("d", p.d()),
        ("lambda", p.lambda()),
        ("gamma", p.gamma()),
        ("a", p.a()),
        ("b", p.b()),
        ("s", p.s()),
        ("q", p.q()),
    ] {
        out.push_str(&format!("{k} = {v}\n"));
    }
    if let Some(seed) = extras.seed {
        out.push_str(&format!("seed = {seed}\n"));
    }
    if let Some(n) = extras.n_paths {
        out.push_str(&format!("n_paths = {n}\n"));
    }
    if let Some(dt) = extras.dt {
        out.push_str(&format!("dt = {dt}\n"));
    }
    if let Some(t) = extras.horizon {
        out.push_str(&format!("horizon = {t}\n"));
    }
    if let Some(g) = extras.grid {
        out.push_str(&format!("grid = {g}\n"));
    }
    out
}
