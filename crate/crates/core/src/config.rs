//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! medium.nu = 2
//! sweep.gamma = logspace(-2, 2, 81)
//! sweep.alpha_l = 0.5, 1, 2
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{CribError, Result};

/// Every key the driver understands.
pub const KNOWN_KEYS: &[&str] = &[
    "medium.nu",
    "medium.alpha_l",
    "medium.alpha0_l",
    "medium.gamma",
    "medium.shape",
    "medium.g0_shape",
    "medium.gamma0",
    "medium.transit",
    "pulse.bandwidth",
    "protocol.direction",
    "protocol.storage_time",
    "grid.n_points",
    "grid.omega_max",
    "oracle.dt",
    "oracle.n_z",
    "oracle.n_delta_p",
    "oracle.n_delta0",
    "oracle.gamma",
    "oracle.storage_time",
    "output.path",
    "sweep.alpha_l",
    "sweep.gamma",
    "sweep.nu",
    "sweep.gamma0",
    "sweep.storage_time",
    "sweep.param",
    "sweep.values",
    "optimize.lo",
    "optimize.hi",
    "optimize.points",
    "optimize.shape",
    "validate.eff_tol",
    "validate.spectrum_tol",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

fn config_err(msg: impl Into<String>) -> CribError {
    CribError::InvalidConfig(msg.into())
}

fn split_pair(line: &str) -> Result<(String, String)> {
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| config_err(format!("expected `key = value`, got `{line}`")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return Err(config_err(format!("empty key or value in `{line}`")));
    }
    if !KNOWN_KEYS.contains(&k) {
        return Err(config_err(format!("unknown key `{k}`")));
    }
    Ok((k.to_string(), v.to_string()))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_pair(line).map_err(|e| config_err(format!("line {}: {e}", n + 1)))?;
            cfg.entries.insert(k, v);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, pair: &str) -> Result<()> {
        let (k, v) = split_pair(pair)?;
        self.entries.insert(k, v);
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) -> Result<()> {
        self.set(&format!("{key}={}", value.to_string()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_number(key, v),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| config_err(format!("`{key}` expects a count, got `{v}`"))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// A list of numbers: comma separated, `linspace(a, b, n)` or
    /// `logspace(a, b, n)` (decades).
    pub fn list_or(&self, key: &str, default: &str) -> Result<Vec<f64>> {
        parse_list(key, self.get(key).unwrap_or(default))
    }

    /// One `key = value` line per entry, sorted by key.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// First 16 hex digits of the SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_number(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| config_err(format!("`{key}` expects a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(config_err(format!("`{key}` must be finite")));
    }
    Ok(x)
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let v = v.trim();
    let spaced = |name: &str| -> Option<&str> { v.strip_prefix(name).and_then(|r| r.strip_suffix(')')) };
    let out = if let Some(args) = spaced("linspace(").or_else(|| spaced("logspace(")) {
        let parts: Vec<&str> = args.split(',').collect();
        if parts.len() != 3 {
            return Err(config_err(format!("`{key}`: range needs (start, stop, count)")));
        }
        let a = parse_number(key, parts[0])?;
        let b = parse_number(key, parts[1])?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| config_err(format!("`{key}`: bad count `{}`", parts[2].trim())))?;
        if n == 0 {
            return Err(config_err(format!("`{key}`: empty range")));
        }
        let lin: Vec<f64> = (0..n)
            .map(|i| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect();
        if v.starts_with("logspace") {
            lin.into_iter().map(|e| 10f64.powf(e)).collect()
        } else {
            lin
        }
    } else {
        v.split(',').map(|s| parse_number(key, s)).collect::<Result<Vec<_>>>()?
    };
    if out.is_empty() {
        return Err(config_err(format!("`{key}` is empty")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_lists_and_ranges() {
        let cfg = Config::parse("# run\nmedium.nu = 2 # coupling\n\nsweep.gamma = logspace(-1, 1, 3)\nsweep.alpha_l = 1, 2.5\n")
            .unwrap();
        assert_eq!(cfg.f64_or("medium.nu", 0.0).unwrap(), 2.0);
        let g = cfg.list_or("sweep.gamma", "1").unwrap();
        assert!((g[0] - 0.1).abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15 && (g[2] - 10.0).abs() < 1e-12);
        assert_eq!(cfg.list_or("sweep.alpha_l", "1").unwrap(), vec![1.0, 2.5]);
        assert_eq!(cfg.list_or("sweep.nu", "linspace(0, 1, 3)").unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Config::parse("medium.nuu = 2").is_err());
        assert!(Config::parse("medium.nu 2").is_err());
        assert!(Config::parse("medium.nu = abc").unwrap().f64_or("medium.nu", 1.0).is_err());
        assert!(Config::parse("sweep.gamma = linspace(0, 1)").unwrap().list_or("sweep.gamma", "1").is_err());
    }

    #[test]
    fn hash_ignores_layout() {
        let a = Config::parse("medium.nu = 2\nmedium.gamma=3").unwrap();
        let mut b = Config::parse("medium.gamma = 3 # x").unwrap();
        b.set("medium.nu=2").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
        b.set("medium.nu=2.5").unwrap();
        assert_ne!(a.hash(), b.hash());
    }
}
