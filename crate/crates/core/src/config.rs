//! Flat `key = value` configuration files.
//!
//! ```text
//! # potential
//! a = 1.0
//! beta = 1.0
//! numerics.n_default = 2000
//! ```
//!
//! Keys may carry an optional `potential.` or `numerics.` prefix. The format
//! is a subset of TOML and is parsed as such.

use std::path::Path;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::model::{NumericsConfig, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub numerics: NumericsConfig,
}

impl RunConfig {
    pub fn from_config_str(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let mut cfg = RunConfig::default();
        for (key, value) in flatten(&table)? {
            cfg.set(&key, &value)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_config_str(&text)
    }

    /// Sets a single key; values are given as text, as on a command line.
    pub fn set_str(&mut self, key: &str, raw: &str) -> Result<()> {
        let value = raw
            .trim()
            .parse::<f64>()
            .map(Value::Float)
            .map_err(|_| Error::Config(format!("{key}: cannot parse {raw:?} as a number")))?;
        self.set(key, &value)
    }

    fn set(&mut self, key: &str, value: &Value) -> Result<()> {
        let bare = key
            .strip_prefix("potential.")
            .or_else(|| key.strip_prefix("numerics."))
            .unwrap_or(key);
        let p = &mut self.potential;
        let n = &mut self.numerics;
        match bare {
            "a" => p.a = number(key, value)?,
            "beta" => p.beta = number(key, value)?,
            "p" => p.p = number(key, value)?,
            "omega" => p.omega = number(key, value)?,
            "q" => p.q = number(key, value)?,
            "M" | "max_mode" => n.max_mode = integer(key, value)?,
            "eig_tol" => n.eig_tol = number(key, value)?,
            "deg_tol" => n.deg_tol = number(key, value)?,
            "R_growth" | "r_growth" => n.r_growth = number(key, value)?,
            "R_tol" | "r_tol" => n.r_tol = number(key, value)?,
            "n_default" => {
                let v = integer(key, value)?;
                n.n_default = usize::try_from(v)
                    .map_err(|_| Error::Config(format!("{key} must be non-negative")))?;
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn to_config_string(&self) -> String {
        let n = &self.numerics;
        format!(
            "{}M = {}\neig_tol = {:?}\ndeg_tol = {:?}\nR_growth = {:?}\nR_tol = {:?}\nn_default = {}\n",
            self.potential.to_config_string(),
            n.max_mode,
            n.eig_tol,
            n.deg_tol,
            n.r_growth,
            n.r_tol,
            n.n_default
        )
    }
}

fn flatten(table: &Table) -> Result<Vec<(String, Value)>> {
    let mut out = Vec::new();
    for (key, value) in table {
        match value {
            Value::Table(inner) => {
                if key != "potential" && key != "numerics" {
                    return Err(Error::Config(format!("unknown section {key:?}")));
                }
                for (k, v) in inner {
                    if v.is_table() {
                        return Err(Error::Config(format!("nested section {key}.{k}")));
                    }
                    out.push((format!("{key}.{k}"), v.clone()));
                }
            }
            other => out.push((key.clone(), other.clone())),
        }
    }
    Ok(out)
}

fn number(key: &str, value: &Value) -> Result<f64> {
    match value {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Config(format!("{key} must be a number"))),
    }
}

fn integer(key: &str, value: &Value) -> Result<i64> {
    match value {
        Value::Integer(i) => Ok(*i),
        Value::Float(f) if f.fract() == 0.0 && f.abs() < 1e15 => Ok(*f as i64),
        _ => Err(Error::Config(format!("{key} must be an integer"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_and_sectioned_keys() {
        let cfg = RunConfig::from_config_str(
            "a = 2\nbeta = 1.5\n# comment\nnumerics.n_default = 500\npotential.omega = 3.0\nM = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.potential.a, 2.0);
        assert_eq!(cfg.potential.beta, 1.5);
        assert_eq!(cfg.potential.omega, 3.0);
        assert_eq!(cfg.potential.q, 2.0);
        assert_eq!(cfg.numerics.n_default, 500);
        assert_eq!(cfg.numerics.max_mode, 4);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(RunConfig::from_config_str("gamma = 1\n").is_err());
        assert!(RunConfig::from_config_str("a = abc\n").is_err());
        assert!(RunConfig::from_config_str("n_default = 2.5\n").is_err());
        assert!(RunConfig::from_config_str("extra.a = 1\n").is_err());
    }

    #[test]
    fn round_trips() {
        let mut cfg = RunConfig::default();
        cfg.potential.beta = 2.25;
        cfg.numerics.eig_tol = 1e-12;
        cfg.numerics.n_default = 1234;
        let back = RunConfig::from_config_str(&cfg.to_config_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn set_str_overrides() {
        let mut cfg = RunConfig::default();
        cfg.set_str("omega", "4").unwrap();
        cfg.set_str("n_default", "100").unwrap();
        assert_eq!(cfg.potential.omega, 4.0);
        assert_eq!(cfg.numerics.n_default, 100);
        assert!(cfg.set_str("omega", "x").is_err());
    }
}
