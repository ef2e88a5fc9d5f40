//! Config-driven experiments: each run writes a report, CSV tables and SVG plots.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod plot;
pub mod sweep;

use std::path::Path;

pub use config::{ExperimentConfig, Kind, Overrides};
pub use error::CliError;
pub use experiments::execute;
pub use output::Outcome;
pub use sweep::{sweep, SweepOutcome};

/// Exit status when every check passed.
pub const EXIT_OK: i32 = 0;
/// Exit status for configuration errors.
pub const EXIT_CONFIG: i32 = 1;
/// Exit status for failed checks or failed computations.
pub const EXIT_FAILED: i32 = 2;

/// Execute the experiment and write its outputs under `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let outcome = execute(cfg)?;
    outcome.write(&cfg.out)?;
    Ok(outcome)
}

/// Load, run and report; returns the process exit status.
pub fn run_path(path: &Path, overrides: &Overrides) -> i32 {
    let mut cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    cfg.apply(overrides);
    match run(&cfg) {
        Ok(o) => {
            print!("{}", o.report_text());
            println!("outputs written to {}", cfg.out.display());
            if o.passed() {
                EXIT_OK
            } else {
                for c in o.failures() {
                    eprintln!("check failed: {}: {}", c.name, c.detail);
                }
                EXIT_FAILED
            }
        }
        Err(e) => report_error(&e),
    }
}

/// Load and sweep one parameter; returns the process exit status.
pub fn sweep_path(path: &Path, overrides: &Overrides, param: &str, values: &[String]) -> i32 {
    let mut cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    cfg.apply(overrides);
    match sweep(&cfg, param, values) {
        Ok(s) => {
            print!("{}", s.report_text());
            println!("outputs written to {}", cfg.out.display());
            if s.passed() {
                EXIT_OK
            } else {
                for f in s.failures() {
                    eprintln!("check failed: {f}");
                }
                EXIT_FAILED
            }
        }
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
