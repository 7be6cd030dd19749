//! Argument parsing and the top-level run loop.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::Parser;

use crate::config::{self, Config};
use crate::experiments::{self, EXPERIMENTS};
use crate::output::{self, Summary};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_CHECK_FAILED: u8 = 2;

/// Caps the worker pool when set.
pub const THREADS_VAR: &str = "KERNEL_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "kernel-lab", version, about = "Run kernel experiments and write CSV/JSON artifacts")]
pub struct Args {
    /// Experiment to run; lists the experiments when omitted
    pub experiment: Option<String>,

    /// TOML configuration file
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory for <experiment>.csv and summary.json
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,

    /// Set a config value, e.g. converge.ks=[1,2,3] (repeatable)
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Print JSON instead of text
    #[arg(long)]
    pub json: bool,

    /// Seed for randomized samples; replaces the config seed
    #[arg(long)]
    pub seed: Option<u64>,
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| anyhow!("{THREADS_VAR}={raw} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().or_else(|e| {
        if rayon::current_num_threads() == n {
            Ok(())
        } else {
            Err(anyhow!("cannot size thread pool: {e}"))
        }
    })
}

fn list(json: bool, out: &mut impl Write) -> Result<()> {
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&EXPERIMENTS)?)?;
    } else {
        for e in &EXPERIMENTS {
            writeln!(out, "{:<12} {} [{}]", e.name, e.description, e.anchor)?;
        }
    }
    Ok(())
}

fn resolve(args: &Args) -> Result<(String, Config)> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let mut config = config::load(&text, &args.overrides)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let name = match (&args.experiment, &config.experiment) {
        (Some(a), Some(c)) if a != c => bail!("experiment `{a}` conflicts with config experiment `{c}`"),
        (Some(a), _) => a.clone(),
        (None, Some(c)) => c.clone(),
        (None, None) => bail!("no experiment given; run without arguments to list them"),
    };
    if experiments::find(&name).is_none() {
        bail!("unknown experiment `{name}`; run without arguments to list them");
    }
    config.experiment = Some(name.clone());
    Ok((name, config))
}

fn execute(args: &Args, out: &mut impl Write) -> Result<bool> {
    let (name, config) = resolve(args)?;
    let outcome = experiments::run(&name, &config)?;
    output::write_artifacts(&args.out, &name, &outcome, &config)?;
    if args.json {
        write!(out, "{}", Summary::new(&name, &outcome, &config).to_json()?)?;
    } else {
        for c in &outcome.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let rule = serde_json::to_value(c.rule)?;
            writeln!(out, "{verdict} {:<24} {:.6e}  {rule}", c.name, c.value)?;
        }
        for f in &outcome.failures {
            writeln!(out, "FAIL numerical: {f}")?;
        }
        writeln!(out, "wrote {}", args.out.join(format!("{name}.csv")).display())?;
    }
    Ok(outcome.passed())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut impl Write, err: &mut impl Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(out, "{}", e.render());
            return EXIT_PASS;
        }
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e:#}");
        return EXIT_USAGE;
    }
    if args.experiment.is_none() && args.config.is_none() && args.overrides.is_empty() {
        return match list(args.json, out) {
            Ok(()) => EXIT_PASS,
            Err(e) => {
                let _ = writeln!(err, "error: {e:#}");
                EXIT_USAGE
            }
        };
    }
    match execute(&args, out) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}
