//! Problem configuration files.
//!
//! The primary format is flat `key = value` text, one field per line.
//! Expression values run unquoted to the end of the line; blank lines and
//! lines starting with `#` are ignored:
//!
//! ```text
//! name = f1
//! f = (t + sin(x))/(2*x^2 + 4)
//! v = 1
//! A = 0.1
//! B = 0.5
//! fx_lower = -0.25
//! N = 100
//! Ns = 8, 16, 32
//! ```
//!
//! Files ending in `.json` hold the same keys as a JSON object.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convergence::{manufacture, StudyError, StudyProblem};
use crate::expr::{self, Expr, ParseError};
use crate::problem::{Constants, ProblemError, ProblemSpec};
use crate::solver::SolverConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("missing field {0}")]
    MissingField(&'static str),
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("{}field {field}: {message}", at_line(*line))]
    BadValue {
        line: Option<usize>,
        field: &'static str,
        message: String,
    },
    #[error("{}field {field}: expression syntax error {source}", at_line(*line))]
    Expression {
        line: Option<usize>,
        field: &'static str,
        source: ParseError,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("give either v or x_star, not both")]
    ForcingConflict,
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Study(#[from] StudyError),
}

fn at_line(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}, ")).unwrap_or_default()
}

/// A validated problem configuration. Expression fields hold the original
/// text; each is known to parse.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemConfig {
    pub name: String,
    pub f: String,
    /// Forcing term; absent when it is manufactured from `x_star`.
    pub v: Option<String>,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub fx_lower: f64,
    pub x_star: Option<String>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "Ns")]
    pub ns: Option<Vec<usize>>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

/// Field values before validation, with the line each came from.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    f: Option<String>,
    v: Option<String>,
    #[serde(rename = "A")]
    a: Option<f64>,
    #[serde(rename = "B")]
    b: Option<f64>,
    fx_lower: Option<f64>,
    x_star: Option<String>,
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "Ns")]
    ns: Option<Vec<usize>>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    #[serde(skip)]
    lines: Vec<(&'static str, usize)>,
}

const KEYS: [&str; 11] = [
    "name", "f", "v", "A", "B", "fx_lower", "x_star", "N", "Ns", "tol", "max_iter",
];

impl RawConfig {
    fn line_of(&self, field: &str) -> Option<usize> {
        self.lines
            .iter()
            .find(|(k, _)| *k == field)
            .map(|&(_, l)| l)
    }

    fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or(ConfigError::Malformed { line: line_no })?;
            let key = key.trim();
            let value = value.trim();
            let Some(&key) = KEYS.iter().find(|&&k| k == key) else {
                return Err(ConfigError::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                });
            };
            if raw.line_of(key).is_some() {
                return Err(ConfigError::Duplicate {
                    line: line_no,
                    key: key.to_string(),
                });
            }
            raw.lines.push((key, line_no));
            let bad = |message: String| ConfigError::BadValue {
                line: Some(line_no),
                field: key,
                message,
            };
            let real = |v: &str| v.parse::<f64>().map_err(|e| bad(format!("`{v}`: {e}")));
            let count = |v: &str| v.parse::<usize>().map_err(|e| bad(format!("`{v}`: {e}")));
            match key {
                "name" => raw.name = Some(value.to_string()),
                "f" => raw.f = Some(value.to_string()),
                "v" => raw.v = Some(value.to_string()),
                "x_star" => raw.x_star = Some(value.to_string()),
                "A" => raw.a = Some(real(value)?),
                "B" => raw.b = Some(real(value)?),
                "fx_lower" => raw.fx_lower = Some(real(value)?),
                "tol" => raw.tol = Some(real(value)?),
                "N" => raw.n = Some(count(value)?),
                "max_iter" => raw.max_iter = Some(count(value)?),
                "Ns" => {
                    raw.ns = Some(
                        value
                            .split(',')
                            .map(|s| count(s.trim()))
                            .collect::<Result<_, _>>()?,
                    )
                }
                _ => unreachable!("key list is exhaustive"),
            }
        }
        Ok(raw)
    }

    fn validate(self) -> Result<ProblemConfig, ConfigError> {
        let expression = |field: &'static str, text: &Option<String>| -> Result<(), ConfigError> {
            if let Some(text) = text {
                expr::parse(text).map_err(|source| ConfigError::Expression {
                    line: self.line_of(field),
                    field,
                    source,
                })?;
            }
            Ok(())
        };
        let f = self.f.clone().ok_or(ConfigError::MissingField("f"))?;
        expression("f", &Some(f.clone()))?;
        expression("v", &self.v)?;
        expression("x_star", &self.x_star)?;
        if self.v.is_none() && self.x_star.is_none() {
            return Err(ConfigError::MissingField("v"));
        }
        if self.v.is_some() && self.x_star.is_some() {
            return Err(ConfigError::ForcingConflict);
        }
        let a = self.a.ok_or(ConfigError::MissingField("A"))?;
        let b = self.b.ok_or(ConfigError::MissingField("B"))?;
        let fx_lower = self.fx_lower.ok_or(ConfigError::MissingField("fx_lower"))?;
        let bad = |field: &'static str, message: &str| ConfigError::BadValue {
            line: self.line_of(field),
            field,
            message: message.to_string(),
        };
        if self.n.is_some_and(|n| n < 2) {
            return Err(bad("N", "must be at least 2"));
        }
        if let Some(ns) = &self.ns {
            if ns.is_empty() || ns.iter().any(|&n| n < 2) {
                return Err(bad("Ns", "every entry must be at least 2"));
            }
        }
        if self.tol.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(bad("tol", "must be positive"));
        }
        let config = ProblemConfig {
            name: self.name.clone().unwrap_or_else(|| "unnamed".to_string()),
            f,
            v: self.v.clone(),
            a,
            b,
            fx_lower,
            x_star: self.x_star.clone(),
            n: self.n,
            ns: self.ns.clone(),
            tol: self.tol,
            max_iter: self.max_iter,
        };
        config.study_problem()?;
        Ok(config)
    }
}

impl ProblemConfig {
    /// Parses config text. `json` selects the JSON rendering.
    pub fn parse_text(text: &str, json: bool) -> Result<Self, ConfigError> {
        let raw = if json {
            serde_json::from_str::<RawConfig>(text)?
        } else {
            RawConfig::from_text(text)?
        };
        raw.validate()
    }

    pub fn constants(&self) -> Constants {
        Constants::new(self.a, self.b, self.fx_lower)
    }

    fn expr(text: &str) -> Expr {
        expr::parse(text).expect("validated at load time")
    }

    /// The problem to solve: manufactured when `x_star` is given.
    pub fn study_problem(&self) -> Result<StudyProblem, ConfigError> {
        let f = Self::expr(&self.f);
        match (&self.v, &self.x_star) {
            (Some(v), None) => Ok(StudyProblem::Plain(ProblemSpec::new(
                f,
                Self::expr(v),
                self.constants(),
            )?)),
            (None, Some(x_star)) => Ok(StudyProblem::Manufactured(manufacture(
                &f,
                &Self::expr(x_star),
                self.constants(),
            )?)),
            (Some(_), Some(_)) => Err(ConfigError::ForcingConflict),
            (None, None) => Err(ConfigError::MissingField("v")),
        }
    }

    pub fn spec(&self) -> Result<ProblemSpec, ConfigError> {
        Ok(self.study_problem()?.spec().clone())
    }

    /// Default solver settings with this config's overrides applied.
    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(tol) = self.tol {
            cfg.tol = tol;
        }
        if let Some(max_iter) = self.max_iter {
            cfg.max_iter = max_iter;
        }
        cfg
    }
}

/// Reads a config file; `.json` files use the JSON rendering.
pub fn load_config(path: &Path) -> Result<ProblemConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    ProblemConfig::parse_text(&text, json)
}
