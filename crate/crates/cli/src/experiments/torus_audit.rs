use anyhow::{Context, Result};
use kernel_lab::torus::{audit_morse, theta_trace_check};

use super::{Outcome, Rule};
use crate::config::TorusAuditConfig;

pub fn run(cfg: &TorusAuditConfig) -> Result<Outcome> {
    let bundle = cfg.torus.build::<f64>("torus-audit.torus")?;
    let report = audit_morse(&bundle, &cfg.ks, cfg.grid).context("torus-audit")?;
    let mut out = Outcome::default();
    out.table(&report)?;

    let nonzero = report.rows.iter().filter(|r| r.morse3_margin != 0).count();
    out.check("morse3_nonzero_margins", nonzero as f64, Rule::AtMost { tolerance: 0.0 });
    let numeric = report.rows.iter().map(|r| r.morse3_numeric.abs() / f64::from(r.k)).fold(0.0, f64::max);
    out.check("morse3_quadrature_per_k", numeric, Rule::AtMost { tolerance: cfg.quadrature_tolerance });
    let min_margin = report.rows.iter().map(|r| r.morse1_margin).fold(f64::INFINITY, f64::min);
    out.check("morse1_min_margin", min_margin, Rule::AtLeast { bound: -cfg.equality_tolerance });
    if cfg.torus.psi.is_empty() {
        let max_abs = report.rows.iter().map(|r| r.morse1_margin.abs()).fold(0.0, f64::max);
        out.check("morse1_equality", max_abs, Rule::AtMost { tolerance: cfg.equality_tolerance });
    }
    if let Some(m) = cfg.strict_margin {
        let ratio = report.rows.iter().map(|r| r.morse1_margin / f64::from(r.k)).fold(f64::INFINITY, f64::min);
        out.check("morse1_margin_per_k", ratio, Rule::AtLeast { bound: m });
    }

    let mut worst = 0.0f64;
    let mut traces = Vec::new();
    for &k in &cfg.trace_ks {
        let t = theta_trace_check(&bundle, k, None).context("torus-audit.trace_ks")?;
        worst = worst.max(t.deviation);
        traces.push((k, t));
    }
    if !cfg.trace_ks.is_empty() {
        out.check("trace_deviation", worst, Rule::AtMost { tolerance: cfg.trace_tolerance });
    }
    out.detail("trace", traces);
    out.detail("grid", report.grid);
    Ok(out)
}
