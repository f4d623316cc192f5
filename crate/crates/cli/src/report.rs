use crate::config::RunConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

/// One pass/fail comparison of a measured value against a limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, limit: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= limit,
            Relation::AtLeast => value >= limit,
            Relation::Above => value > limit,
        };
        Check {
            name: name.into(),
            value,
            relation,
            limit,
            passed,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(name, value, Relation::AtMost, limit)
    }

    /// Counts of violations must be zero.
    pub fn none(name: impl Into<String>, count: usize) -> Self {
        Check::new(name, count as f64, Relation::AtMost, 0.0)
    }
}

/// A subcommand's data file: the config that produced it, its checks and
/// the module output.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T> {
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub result: T,
}

impl<T> Report<T> {
    pub fn new(config: RunConfig, checks: Vec<Check>, result: T) -> Self {
        Report {
            passed: checks.iter().all(|c| c.passed),
            config,
            checks,
            result,
        }
    }
}

/// Run metadata, kept out of the data files so those stay reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub started_unix_seconds: u64,
    pub elapsed_seconds: f64,
    pub passed: bool,
    pub files: Vec<String>,
}
