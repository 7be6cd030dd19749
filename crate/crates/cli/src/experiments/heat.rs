use anyhow::{Context, Result};
use kernel_lab::scaling::heat_route_comparison;

use super::{is_numerical, Outcome, Rule};
use crate::config::HeatConfig;

pub fn run(cfg: &HeatConfig) -> Result<Outcome> {
    let family = cfg.family.build::<f64>("heat.family")?;
    let mut out = Outcome::default();
    let report = match heat_route_comparison(&family, &cfg.ks, &cfg.ts, &cfg.settings) {
        Ok(r) => r,
        Err(e) if is_numerical(&e) => {
            out.failures.push(format!("ks={:?}, D={}: {e}", cfg.ks, cfg.settings.degree));
            return Ok(out);
        }
        Err(e) => return Err(e).context("heat"),
    };
    out.table(&report)?;

    let slope = report.fits.iter().map(|f| f.relative_deviation.unwrap_or(f64::NAN)).fold(0.0, f64::max);
    let slope = if report.fits.iter().any(|f| f.relative_deviation.is_none()) { f64::NAN } else { slope };
    out.check("slope_deviation", slope, Rule::AtMost { tolerance: cfg.slope_tolerance });
    let increases = report.rows.windows(2).filter(|w| w[0].k == w[1].k && w[1].difference >= w[0].difference).count();
    out.check("non_decreasing_steps", increases as f64, Rule::AtMost { tolerance: 0.0 });
    out.check("k_spread", report.k_spread, Rule::AtMost { tolerance: cfg.k_spread_tolerance });
    out.check("route_deviation", report.route_deviation, Rule::AtMost { tolerance: cfg.route_tolerance });
    out.detail("fits", &report.fits);
    Ok(out)
}
