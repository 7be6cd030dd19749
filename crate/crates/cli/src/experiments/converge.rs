use anyhow::{Context, Result};
use kernel_lab::scaling::scaled_bergman_convergence;

use super::{Outcome, Rule};
use crate::config::ConvergeConfig;

pub fn run(cfg: &ConvergeConfig) -> Result<Outcome> {
    let family = cfg.family.build::<f64>("converge.family")?;
    let report = scaled_bergman_convergence(&family, &cfg.ks, &cfg.settings).context("converge")?;
    let mut out = Outcome::default();
    out.table(&report)?;
    out.failures = report.failures().into_iter().map(|(_, msg)| msg).collect();

    if let Some(tol) = cfg.checks.max_error {
        out.check("max_error", report.max_error().unwrap_or(f64::NAN), Rule::AtMost { tolerance: tol });
    }
    if let Some(s) = cfg.checks.slope {
        let slope = report.slope.map_or(f64::NAN, |f| f.slope);
        out.check("slope", slope, Rule::Within { target: s.expected, tolerance: s.tolerance });
    }
    if cfg.checks.decreasing {
        let e = report.errors();
        let bad = e.windows(2).filter(|w| !matches!((w[0], w[1]), (Some(a), Some(b)) if b < a)).count();
        out.check("non_decreasing_steps", bad as f64, Rule::AtMost { tolerance: 0.0 });
    }
    let route = report.rows.iter().filter_map(|r| r.route_deviation).fold(0.0, f64::max);
    out.check("route_deviation", route, Rule::AtMost { tolerance: cfg.checks.route_tolerance });

    out.detail("slope_fit", report.slope);
    out.detail("grid", &report.grid);
    Ok(out)
}
