use anyhow::{Context, Result};
use kernel_lab::report::{fmt_float, fmt_opt};
use kernel_lab::scaling::{model_lambda, vanishing_convergence, ConvergenceReport};

use super::{Outcome, Rows, Rule};
use crate::config::VanishConfig;

fn push_rows(rows: &mut Vec<Vec<String>>, run: &str, d: f64, report: &ConvergenceReport) {
    for r in &report.rows {
        rows.push(vec![
            run.to_string(),
            fmt_float(d),
            r.k.to_string(),
            fmt_float(r.ck),
            r.rank.map(|v| v.to_string()).unwrap_or_default(),
            fmt_opt(r.error),
            fmt_opt(r.gap),
            r.failure.clone().unwrap_or_default(),
        ]);
    }
}

pub fn run(cfg: &VanishConfig) -> Result<Outcome> {
    let family = cfg.family.build::<f64>("vanish.family")?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let mut worst = 0usize;
    for &d in &cfg.thresholds {
        let report = vanishing_convergence(&family, cfg.q, &cfg.ks, d, &cfg.settings).context("vanish")?;
        push_rows(&mut rows, "mismatched", d, &report);
        for r in report.rows.iter().filter(|r| r.ck >= cfg.min_ck) {
            worst = worst.max(r.rank.unwrap_or(0));
        }
        out.failures.extend(report.failures().into_iter().map(|(_, m)| m));
    }
    out.check("max_rank", worst as f64, Rule::AtMost { tolerance: 0.0 });

    if cfg.control {
        let matched = usize::from(model_lambda(&family.model())? < 0.0);
        let d = cfg.thresholds.first().copied().unwrap_or(1.0);
        let report = vanishing_convergence(&family, matched, &cfg.ks, d, &cfg.settings).context("vanish control")?;
        push_rows(&mut rows, "control", d, &report);
        let min = report.rows.iter().filter(|r| r.ck >= cfg.min_ck).filter_map(|r| r.rank).min().unwrap_or(0);
        out.check("control_min_rank", min as f64, Rule::AtLeast { bound: 1.0 });
        out.failures.extend(report.failures().into_iter().map(|(_, m)| m));
        out.detail("control_q", matched);
    }
    out.table(&Rows { header: vec!["run", "d", "k", "C_k", "rank", "error", "gap", "failure"], rows })?;
    Ok(out)
}
