//! Experiment configuration: TOML with one typed section per experiment.
//!
//! Every field has a default, so an empty file is a valid configuration and the
//! resolved values are echoed verbatim into `summary.json`.

use anyhow::{anyhow, bail, Context, Result};
use kernel_lab::config::{FamilySpec, TorusSpec};
use kernel_lab::scaling::LabSettings;
use kernel_lab::weight::CkRule;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub experiment: Option<String>,
    /// Seed for every randomized sample.
    pub seed: u64,
    pub model: ModelConfig,
    pub converge: ConvergeConfig,
    pub vanish: VanishConfig,
    pub gap: GapConfig,
    pub heat: HeatConfig,
    #[serde(rename = "torus-audit")]
    pub torus_audit: TorusAuditConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 1,
            model: ModelConfig::default(),
            converge: ConvergeConfig::default(),
            vanish: VanishConfig::default(),
            gap: GapConfig::default(),
            heat: HeatConfig::default(),
            torus_audit: TorusAuditConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Random spectra drawn for the prefactor check.
    pub spectra: usize,
    pub max_dimension: usize,
    pub prefactor_tolerance: f64,
    pub lambdas: Vec<f64>,
    pub max_order: u32,
    pub quadrature_order: usize,
    pub orthonormality_tolerance: f64,
    pub expansion_degree: u32,
    pub expansion_radius: f64,
    pub expansion_tolerance: f64,
    pub galerkin_lambdas: Vec<f64>,
    pub galerkin_degree: usize,
    pub grid_per_axis: usize,
    pub grid_radius: f64,
    pub galerkin_tolerance: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            spectra: 20,
            max_dimension: 3,
            prefactor_tolerance: 1e-12,
            lambdas: vec![0.5, 1.0, 3.0],
            max_order: 6,
            quadrature_order: 16,
            orthonormality_tolerance: 1e-8,
            expansion_degree: 40,
            expansion_radius: 1.0,
            expansion_tolerance: 1e-6,
            galerkin_lambdas: vec![1.0, 2.0],
            galerkin_degree: 30,
            grid_per_axis: 3,
            grid_radius: 1.5,
            galerkin_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeCheck {
    pub expected: f64,
    pub tolerance: f64,
}

/// Checks applied to a convergence run; absent entries are skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeChecks {
    pub slope: Option<SlopeCheck>,
    pub max_error: Option<f64>,
    pub decreasing: bool,
    pub route_tolerance: f64,
}

impl Default for ConvergeChecks {
    fn default() -> Self {
        Self { slope: None, max_error: None, decreasing: false, route_tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeConfig {
    pub family: FamilySpec,
    pub ks: Vec<u32>,
    pub settings: LabSettings,
    pub checks: ConvergeChecks,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            family: FamilySpec::cubic(1.0, 0.5, CkRule::Geometric { ratio: 4.0 }),
            ks: (1..=7).collect(),
            settings: LabSettings::default(),
            checks: ConvergeChecks {
                slope: Some(SlopeCheck { expected: -0.5, tolerance: 0.2 }),
                decreasing: true,
                ..ConvergeChecks::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VanishConfig {
    pub family: FamilySpec,
    pub q: usize,
    pub ks: Vec<u32>,
    /// Threshold exponents `d` in `c = C_k^{-d}`.
    pub thresholds: Vec<f64>,
    /// Only `k` with `C_k` at least this large are checked.
    pub min_ck: f64,
    /// Also run the matched degree and require a nonzero rank.
    pub control: bool,
    pub settings: LabSettings,
}

impl Default for VanishConfig {
    fn default() -> Self {
        Self {
            family: FamilySpec::quadratic(1.0, CkRule::Geometric { ratio: 4.0 }),
            q: 1,
            ks: (1..=7).collect(),
            thresholds: vec![1.0, 2.0],
            min_ck: 16.0,
            control: true,
            settings: LabSettings { degree: 16, ..LabSettings::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapConfig {
    pub lambda: f64,
    pub q: usize,
    /// Truncation degrees; the last two are compared.
    pub degrees: Vec<usize>,
    pub plateau_tolerance: f64,
    /// Curvature scales `s` for the ratio `gap(sλ)/(s·gap(λ))`.
    pub scales: Vec<f64>,
    pub ratio_degree: usize,
    pub ratio_tolerance: f64,
    /// Model eigenvalues for the Hodge check, each at its matched degree.
    pub hodge_lambdas: Vec<f64>,
    pub hodge_degree: usize,
    pub hodge_samples: usize,
    pub hodge_tolerance: f64,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            q: 1,
            degrees: vec![16, 24, 32],
            plateau_tolerance: 0.02,
            scales: vec![2.0, 4.0],
            ratio_degree: 16,
            ratio_tolerance: 0.05,
            hodge_lambdas: vec![1.0, -1.0],
            hodge_degree: 16,
            hodge_samples: 20,
            hodge_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatConfig {
    pub family: FamilySpec,
    pub ks: Vec<u32>,
    pub ts: Vec<f64>,
    pub settings: LabSettings,
    /// Bound on `|slope + gap| / gap`.
    pub slope_tolerance: f64,
    pub k_spread_tolerance: f64,
    pub route_tolerance: f64,
}

impl Default for HeatConfig {
    fn default() -> Self {
        Self {
            family: FamilySpec::quadratic(1.0, CkRule::Linear { slope: 1.0 }),
            ks: vec![1, 2, 3],
            ts: vec![1.0, 2.0, 4.0, 8.0],
            settings: LabSettings { degree: 20, ..LabSettings::default() },
            slope_tolerance: 0.1,
            k_spread_tolerance: 1e-8,
            route_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorusAuditConfig {
    pub torus: TorusSpec,
    pub ks: Vec<u32>,
    pub grid: usize,
    /// Slack on the weak inequality, and on equality when `psi` is empty.
    pub equality_tolerance: f64,
    /// Bound on `|morse3_numeric| / k`.
    pub quadrature_tolerance: f64,
    /// Required `morse1_margin / k` when set.
    pub strict_margin: Option<f64>,
    pub trace_ks: Vec<u32>,
    pub trace_tolerance: f64,
}

impl Default for TorusAuditConfig {
    fn default() -> Self {
        Self {
            torus: TorusSpec::default(),
            ks: (1..=10).collect(),
            grid: 256,
            equality_tolerance: 1e-10,
            quadrature_tolerance: 1e-9,
            strict_margin: None,
            trace_ks: (1..=6).collect(),
            trace_tolerance: 1e-6,
        }
    }
}

/// Parses `text`, applies `key.path=value` overrides, and deserializes with key paths in errors.
pub fn load(text: &str, overrides: &[String]) -> Result<Config> {
    let mut table: Table = text.parse().context("config is not valid TOML")?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    serde_path_to_error::deserialize(Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            anyhow!("config error: {}", e.inner())
        } else {
            anyhow!("config error at `{path}`: {}", e.inner())
        }
    })
}

/// Reads a TOML literal, falling back to a bare string.
fn literal(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn apply_override(table: &mut Table, spec: &str) -> Result<()> {
    let Some((key, raw)) = spec.split_once('=') else {
        bail!("override `{spec}` is not key=value");
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override `{spec}` has an empty key segment");
    }
    let (last, parents) = parts.split_last().expect("split yields at least one segment");
    let mut cur = table;
    for (i, p) in parents.iter().enumerate() {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{spec}`: `{}` is not a table", parts[..=i].join(".")))?;
    }
    cur.insert(last.to_string(), literal(raw.trim()));
    Ok(())
}
