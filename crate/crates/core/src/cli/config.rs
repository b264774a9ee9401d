//! Effective configuration: defaults, then an optional `key = value` file,
//! then flags.

use std::path::{Path, PathBuf};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::CoreError;
use crate::rational::{parse_rational, pow2_neg, to_wire, Rational};

/// Names the config file when `--config` is absent.
pub const CONFIG_ENV: &str = "PROBSTRAT_CONFIG";

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub eps: Rational,
    pub depth: usize,
    pub rounds: usize,
    pub g: u64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config { eps: pow2_neg(20), depth: 12, rounds: 6, g: 16, seed: 0 }
    }
}

/// Overrides from flags; `None` keeps the lower layer.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub eps: Option<String>,
    pub depth: Option<usize>,
    pub rounds: Option<usize>,
    pub g: Option<u64>,
    pub seed: Option<u64>,
}

/// `2^-k` or any rational literal.
pub fn parse_eps(text: &str) -> Result<Rational, CoreError> {
    let t = text.trim();
    let v = match t.strip_prefix("2^-").or_else(|| t.strip_prefix("2^(-").and_then(|r| r.strip_suffix(')'))) {
        Some(k) => k.trim().parse::<u64>().ok().map(pow2_neg),
        None => parse_rational(t),
    };
    v.ok_or_else(|| CoreError::InvalidInput(format!("bad epsilon `{text}`")))
}

fn bad(key: &str, v: &str) -> CoreError {
    CoreError::InvalidInput(format!("bad value `{v}` for `{key}`"))
}

impl Config {
    pub fn apply_text(&mut self, text: &str) -> Result<(), CoreError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CoreError::InvalidInput(format!("config line {}: expected `key = value`", n + 1)))?;
            let (k, v) = (k.trim(), v.trim().trim_matches('"'));
            match k {
                "eps" | "epsilon" => self.eps = parse_eps(v)?,
                "depth" => self.depth = v.parse().map_err(|_| bad(k, v))?,
                "rounds" => self.rounds = v.parse().map_err(|_| bad(k, v))?,
                "g" | "G" => self.g = v.parse().map_err(|_| bad(k, v))?,
                "seed" => self.seed = v.parse().map_err(|_| bad(k, v))?,
                _ => return Err(CoreError::InvalidInput(format!("config line {}: unknown key `{k}`", n + 1))),
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CoreError> {
        if let Some(e) = &o.eps {
            self.eps = parse_eps(e)?;
        }
        self.depth = o.depth.unwrap_or(self.depth);
        self.rounds = o.rounds.unwrap_or(self.rounds);
        self.g = o.g.unwrap_or(self.g);
        self.seed = o.seed.unwrap_or(self.seed);
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.eps <= Rational::zero() || self.eps >= Rational::one() {
            return Err(CoreError::InvalidInput("epsilon must lie strictly between 0 and 1".into()));
        }
        if self.depth == 0 {
            return Err(CoreError::InvalidInput("depth must be at least 1".into()));
        }
        Ok(())
    }

    /// Defaults, then the file from `path` or the environment, then flags.
    pub fn resolve(path: Option<&Path>, o: &Overrides) -> Result<Config, CoreError> {
        let mut c = Config::default();
        let file: Option<PathBuf> = path.map(Path::to_path_buf).or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        if let Some(f) = file {
            let text = std::fs::read_to_string(&f).map_err(|e| CoreError::InvalidInput(format!("{}: {e}", f.display())))?;
            c.apply_text(&text)?;
        }
        c.apply(o)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "eps": to_wire(&self.eps),
            "depth": self.depth,
            "rounds": self.rounds,
            "g": self.g,
            "seed": self.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn layers_apply_in_order() {
        let mut c = Config::default();
        c.apply_text("# tuned\neps = 2^-10\ndepth = 5\nseed=9").unwrap();
        assert_eq!((c.eps.clone(), c.depth, c.seed), (pow2_neg(10), 5, 9));
        c.apply(&Overrides { depth: Some(7), eps: Some("1/8".into()), ..Default::default() }).unwrap();
        assert_eq!((c.eps.clone(), c.depth, c.rounds), (rat(1, 8), 7, 6));
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(Config::default().apply_text("colour = red").is_err());
        assert!(Config::default().apply_text("depth 3").is_err());
        let c = Config { depth: 0, ..Config::default() };
        assert!(c.validate().is_err());
        assert!(parse_eps("2^-x").is_err());
        assert_eq!(parse_eps("2^(-3)").unwrap(), rat(1, 8));
    }

    #[test]
    fn echo_uses_wire_rationals() {
        assert_eq!(Config::default().to_json()["eps"], "1/1048576");
    }
}
