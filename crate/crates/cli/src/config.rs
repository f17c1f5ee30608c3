//! Suite configuration: defaults, the line-oriented key=value file
//! format, and validation. Command-line flags override file values.

use std::path::{Path, PathBuf};

use isoprod::poly::{parse_rat, Rat};
use num_traits::{One, Zero};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub const SUITES: &[&str] = &["recurrence", "kac", "system", "jacobi", "geometry", "all"];

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub suite: String,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub c: Vec<i8>,
    pub tau: Vec<Rat>,
    pub kappa: Vec<f64>,
    pub a: Vec<f64>,
    /// None means "auto": (m+1)n + 2 per parameter point
    pub kmax: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub family: String,
    pub out: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suite: "all".into(),
            n: vec![2, 3],
            m: vec![1, 2],
            c: vec![-1, 1],
            tau: vec![Rat::new(1.into(), 2.into())],
            kappa: vec![0.5, 1.0, 2.0],
            a: vec![0.5, 1.0, 2.0],
            kmax: None,
            seed: 20240817,
            trials: 20,
            family: "both".into(),
            out: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !SUITES.contains(&self.suite.as_str()) {
            return Err(ConfigError(format!(
                "unknown suite {:?}; expected one of {SUITES:?}",
                self.suite
            )));
        }
        for tau in &self.tau {
            if tau <= &Rat::zero() || tau >= &Rat::one() {
                return Err(ConfigError(format!("tau = {tau} must lie in (0, 1)")));
            }
        }
        for c in &self.c {
            if *c != 1 && *c != -1 {
                return Err(ConfigError(format!("c = {c} must be -1 or 1")));
            }
        }
        for n in &self.n {
            if *n < 2 {
                return Err(ConfigError(format!("n = {n} must be at least 2")));
            }
        }
        for m in &self.m {
            if *m < 1 {
                return Err(ConfigError(format!("m = {m} must be at least 1")));
            }
        }
        if self.trials < 1 {
            return Err(ConfigError("trials must be at least 1".into()));
        }
        if !["s1", "hn", "both"].contains(&self.family.as_str()) {
            return Err(ConfigError(format!(
                "unknown family {:?}; expected s1, hn or both",
                self.family
            )));
        }
        Ok(())
    }

    pub fn kmax_for(&self, n: usize, m: usize) -> usize {
        self.kmax.unwrap_or((m + 1) * n + 2)
    }

    /// Apply one key=value assignment (used by both the file parser and
    /// the flag merger).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn list(v: &str) -> Vec<&str> {
            v.split(',').map(str::trim).collect()
        }
        match key {
            "suite" => self.suite = value.to_string(),
            "family" => self.family = value.to_string(),
            "n" => self.n = parse_list(&list(value), "n")?,
            "m" => self.m = parse_list(&list(value), "m")?,
            "c" => self.c = parse_list(&list(value), "c")?,
            "kappa" => self.kappa = parse_list(&list(value), "kappa")?,
            "a" => self.a = parse_list(&list(value), "a")?,
            "tau" => {
                self.tau = list(value)
                    .iter()
                    .map(|s| {
                        parse_rat(s).map_err(|e| {
                            ConfigError(format!("malformed rational {s:?} for tau: {e}"))
                        })
                    })
                    .collect::<Result<_, _>>()?;
            }
            "kmax" => {
                self.kmax = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|_| {
                        ConfigError(format!("kmax must be an integer or \"auto\", got {value:?}"))
                    })?)
                };
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| ConfigError(format!("malformed seed {value:?}")))?;
            }
            "trials" => {
                self.trials = value
                    .parse()
                    .map_err(|_| ConfigError(format!("malformed trials {value:?}")))?;
            }
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(ConfigError(format!("unknown key {other:?}"))),
        }
        Ok(())
    }
}

fn parse_list<T: std::str::FromStr>(items: &[&str], key: &str) -> Result<Vec<T>, ConfigError> {
    items
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| ConfigError(format!("malformed value {s:?} for {key}")))
        })
        .collect()
}

/// Line-oriented key=value file; '#' starts a comment.
pub fn parse_config_file(path: &Path, cfg: &mut SuiteConfig) -> Result<(), ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError(format!("{}:{}: expected key=value", path.display(), lineno + 1))
        })?;
        cfg.set(key.trim(), value.trim())
            .map_err(|e| ConfigError(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
    }
    Ok(())
}
