//! Command-line front end for the kernel-lab experiments.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod output;

pub use cli::run;
