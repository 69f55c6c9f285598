//! Run configuration: tolerances, Monte Carlo budget, seed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Relative tolerance for 1D adaptive quadrature.
    pub rel_tol: f64,
    /// Absolute tolerance, in units of the system's natural energy scale.
    pub abs_tol: f64,
    pub mc_samples: usize,
    pub mc_burn_in: usize,
    pub rng_seed: u64,
    /// Density fraction of the peak below which integration domains are cut.
    pub tail_cutoff: f64,
    /// Fail a Monte Carlo shift whose relative standard error exceeds this.
    #[serde(default)]
    pub mc_max_rel_error: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            mc_samples: 100_000,
            mc_burn_in: 10_000,
            rng_seed: 42,
            tail_cutoff: 1e-18,
            mc_max_rel_error: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || !(self.tail_cutoff > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.mc_samples == 0 {
            return Err(Error::Config("mc_samples must be positive".into()));
        }
        Ok(())
    }

    pub fn with_seed(self, rng_seed: u64) -> Self {
        RunConfig { rng_seed, ..self }
    }

    pub fn with_mc_samples(self, mc_samples: usize) -> Self {
        RunConfig { mc_samples, ..self }
    }

    /// Parse `key = value` lines. Blank lines and `#` comments are ignored;
    /// keys not mentioned keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Self::parse(&text)
    }

    /// Set a single key, as used by both the file parser and CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse::<T>().map_err(|_| format!("cannot parse '{v}'"))
        }
        fn count(v: &str) -> std::result::Result<usize, String> {
            // accept 1e6-style counts
            match v.parse::<usize>() {
                Ok(n) => Ok(n),
                Err(_) => {
                    let f: f64 = num(v)?;
                    if f >= 0.0 && f.fract() == 0.0 && f < 1e15 {
                        Ok(f as usize)
                    } else {
                        Err(format!("'{v}' is not a count"))
                    }
                }
            }
        }
        match key {
            "rel_tol" => self.rel_tol = num(value)?,
            "abs_tol" => self.abs_tol = num(value)?,
            "mc_samples" => self.mc_samples = count(value)?,
            "mc_burn_in" | "burn_in" => self.mc_burn_in = count(value)?,
            "rng_seed" | "seed" => self.rng_seed = num(value)?,
            "tail_cutoff" => self.tail_cutoff = num(value)?,
            "mc_max_rel_error" => self.mc_max_rel_error = Some(num(value)?),
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides_defaults() {
        let cfg = RunConfig::parse(
            "# tolerances\nrel_tol = 1e-7\nmc_samples=1e6 \n\nrng_seed = 7 # trailing\n",
        )
        .unwrap();
        assert_eq!(cfg.rel_tol, 1e-7);
        assert_eq!(cfg.mc_samples, 1_000_000);
        assert_eq!(cfg.rng_seed, 7);
        assert_eq!(cfg.tail_cutoff, 1e-18);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(RunConfig::parse("rel_tol 1e-7").is_err());
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("rel_tol = -1").is_err());
        assert!(RunConfig::parse("mc_samples = 0").is_err());
    }
}
