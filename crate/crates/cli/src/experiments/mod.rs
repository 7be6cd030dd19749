//! Named experiments, their checks, and the tables they emit.

mod converge;
mod gap;
mod heat;
mod model;
mod torus_audit;
mod vanish;

use anyhow::Result;
use kernel_lab::report::Table;
use kernel_lab::Error;
use serde::Serialize;

use crate::config::Config;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub anchor: &'static str,
}

/// Sorted by name.
pub const EXPERIMENTS: [ExperimentInfo; 6] = [
    ExperimentInfo {
        name: "converge",
        description: "scaled Bergman kernels of a weight family against the model kernel, with a log-log rate fit",
        anchor: "scaling limit of the Bergman kernel",
    },
    ExperimentInfo {
        name: "gap",
        description: "spectral gap plateau in D, linear growth with curvature, Hodge decomposition residual",
        anchor: "spectral gap lemma; Hodge decomposition",
    },
    ExperimentInfo {
        name: "heat",
        description: "heat kernel minus Bergman projector over t, by both scaling routes",
        anchor: "heat kernel route to the Bergman limit",
    },
    ExperimentInfo {
        name: "model",
        description: "closed-form model kernel: prefactor, orthonormal basis, expansion, Galerkin agreement",
        anchor: "model theorem",
    },
    ExperimentInfo {
        name: "torus-audit",
        description: "holomorphic Morse inequalities and the theta trace identity on an elliptic curve",
        anchor: "holomorphic Morse inequalities; asymptotic Riemann-Roch",
    },
    ExperimentInfo {
        name: "vanish",
        description: "spectral projector rank in a mismatched form degree at threshold C_k^-d",
        anchor: "vanishing theorem",
    },
];

pub fn find(name: &str) -> Option<&'static ExperimentInfo> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

/// Acceptance rule for a scalar measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    AtMost { tolerance: f64 },
    AtLeast { bound: f64 },
    Within { target: f64, tolerance: f64 },
}

impl Rule {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Rule::AtMost { tolerance } => v <= tolerance,
            Rule::AtLeast { bound } => v >= bound,
            Rule::Within { target, tolerance } => (v - target).abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    #[serde(flatten)]
    pub rule: Rule,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, rule: Rule) -> Self {
        Self { name: name.into(), value, passed: rule.holds(value), rule }
    }
}

/// Result of one experiment run.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub csv: Vec<u8>,
    pub checks: Vec<Check>,
    /// Numerical failures with the offending `k` and `D`.
    pub failures: Vec<String>,
    pub details: serde_json::Map<String, serde_json::Value>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn check(&mut self, name: impl Into<String>, value: f64, rule: Rule) {
        self.checks.push(Check::new(name, value, rule));
    }

    fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    fn table(&mut self, t: &impl Table) -> Result<()> {
        t.write_csv(&mut self.csv)?;
        Ok(())
    }
}

/// Failures of the discretization itself, as opposed to bad parameters.
pub(crate) fn is_numerical(e: &Error) -> bool {
    matches!(e, Error::GramConditioning { .. } | Error::NotPositiveSemidefinite { .. })
}

/// Plain string table for experiments without a library report type.
pub(crate) struct Rows {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table for Rows {
    fn header(&self) -> Vec<String> {
        self.header.iter().map(|s| s.to_string()).collect()
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows.clone()
    }
}

pub fn run(name: &str, config: &Config) -> Result<Outcome> {
    match name {
        "converge" => converge::run(&config.converge),
        "gap" => gap::run(&config.gap, config.seed),
        "heat" => heat::run(&config.heat),
        "model" => model::run(&config.model, config.seed),
        "torus-audit" => torus_audit::run(&config.torus_audit),
        "vanish" => vanish::run(&config.vanish),
        other => anyhow::bail!("unknown experiment `{other}`"),
    }
}
