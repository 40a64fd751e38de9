//! Flat `key = value` configuration.
//!
//! ```text
//! # comments start with '#'
//! seed = 7
//! count = 1000
//! max-depth = 6
//! max-fanout = 3
//! k = 2-7              # list of moduli: numbers and inclusive ranges
//! p = 4,5,6,7,8
//! caps = vars=20,vertices=16,subtree-depth=20,scaling=64
//! instances = 200
//! report-dir = reports
//! proposition = closure
//! problem = perf-match # how graph files are read
//! negative-control = false
//! ```
//!
//! Command-line flags use the same names and override the file.

use std::path::PathBuf;

use pathcount_core::problems::Caps;
use pathcount_core::suites::{Proposition, SuiteConfig};
use pathcount_core::ProblemKind;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub suite: SuiteConfig,
    pub report_dir: PathBuf,
    /// `None` runs every suite.
    pub proposition: Option<Proposition>,
    /// How `p edge` files are interpreted.
    pub problem: ProblemKind,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            suite: SuiteConfig::default(),
            report_dir: PathBuf::from("reports"),
            proposition: None,
            problem: ProblemKind::PerfectMatchings,
        }
    }
}

pub const KEYS: [&str; 13] = [
    "seed",
    "count",
    "max-depth",
    "max-fanout",
    "wrap-probability",
    "k",
    "p",
    "caps",
    "instances",
    "negative-control",
    "report-dir",
    "proposition",
    "problem",
];

impl Config {
    /// Parses a configuration file on top of the defaults.
    pub fn parse(text: &str) -> Result<Config, CliError> {
        let mut cfg = Config::default();
        cfg.merge(text)?;
        Ok(cfg)
    }

    /// Applies every assignment in `text`; later lines win.
    pub fn merge(&mut self, text: &str) -> Result<(), CliError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
                line: idx + 1,
                message: format!("expected key = value, found {line:?}"),
            })?;
            self.set(key.trim(), value.trim()).map_err(|message| CliError::Config {
                line: idx + 1,
                message,
            })?;
        }
        Ok(())
    }

    /// Sets one key. The error is a message without position.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let s = &mut self.suite;
        match key {
            "seed" => s.corpus.seed = number(key, value)?,
            "count" => s.corpus.count = number(key, value)?,
            "max-depth" => s.corpus.max_depth = number(key, value)?,
            "max-fanout" => s.corpus.max_fanout = number(key, value)?,
            "wrap-probability" => {
                let p: f64 = number(key, value)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(format!("wrap-probability must lie in [0, 1], got {p}"));
                }
                s.corpus.wrap_probability = p;
            }
            "k" => s.k_values = number_list(key, value)?,
            "p" => s.p_values = number_list(key, value)?,
            "caps" => s.caps = caps(value, s.caps)?,
            "instances" => s.instances = number(key, value)?,
            "negative-control" => s.negative_control = number(key, value)?,
            "report-dir" => self.report_dir = PathBuf::from(value),
            "proposition" => {
                self.proposition = match value {
                    "all" => None,
                    id => Some(id.parse().map_err(|e: pathcount_core::Error| e.to_string())?),
                }
            }
            "problem" => self.problem = value.parse().map_err(|e: pathcount_core::Error| e.to_string())?,
            other => {
                return Err(format!(
                    "unknown key {other:?}; known keys: {}",
                    KEYS.join(", ")
                ))
            }
        }
        Ok(())
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: cannot read {value:?}"))
}

/// `2-7`, `2,3,5` or a mix such as `2,4-6`.
fn number_list(key: &str, value: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi): (usize, usize) = (number(key, lo.trim())?, number(key, hi.trim())?);
                if lo > hi {
                    return Err(format!("{key}: empty range {part:?}"));
                }
                out.extend(lo..=hi);
            }
            None => out.push(number(key, part)?),
        }
    }
    Ok(out)
}

/// `vars=20,vertices=16,subtree-depth=20,scaling=64`; omitted fields keep
/// their current value.
fn caps(value: &str, mut caps: Caps) -> Result<Caps, String> {
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("caps: expected name=value, found {part:?}"))?;
        let v: usize = number("caps", v.trim())?;
        match k.trim() {
            "vars" => caps.max_vars = v,
            "vertices" => caps.max_vertices = v,
            "subtree-depth" => caps.max_subtree_depth = v,
            "scaling" => caps.max_scaling_exponent = v,
            other => {
                return Err(format!(
                    "caps: unknown field {other:?} (vars, vertices, subtree-depth, scaling)"
                ))
            }
        }
    }
    Ok(caps)
}
