//! Experiment runner for `twowell-core`: TOML configuration, CSV/JSON
//! output with a provenance header, and the subcommands of the `twowell`
//! binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use twowell_core::tolerance::{set_tolerances, Tolerances};

pub use config::{ExperimentConfig, Overrides};
pub use error::LabError;
pub use output::OutputDir;

/// Thread count for the rayon pool; unset or `0` means one per core.
pub const THREADS_VAR: &str = "TWOWELL_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Envelope,
    Laminate,
    Minimizer,
    Hashin,
    Square,
    Verify,
}

/// Sizes the global rayon pool from [`THREADS_VAR`]. Later calls are no-ops.
pub fn init_threads() -> Result<(), LabError> {
    let threads = match std::env::var(THREADS_VAR) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            LabError::Config(format!(
                "{THREADS_VAR} must be a non-negative integer, got {v:?}"
            ))
        })?,
        Err(_) => 0,
    };
    // Fails only when the pool already exists.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Validates `config`, installs its scaled tolerances and runs `command`.
/// Returns the output directory with the list of files written.
pub fn run(command: Command, config: &ExperimentConfig) -> Result<OutputDir, LabError> {
    config.validate()?;
    let tol = config.scaled();
    set_tolerances(Tolerances {
        algebraic: tol.algebraic,
        envelope: tol.envelope,
    });
    let mut out = OutputDir::create(config)?;
    match command {
        Command::Envelope => commands::envelope::run(config, &mut out)?,
        Command::Laminate => commands::laminate::run(config, &mut out)?,
        Command::Minimizer => commands::minimizer::run(config, &mut out)?,
        Command::Hashin => commands::hashin::run(config, &mut out)?,
        Command::Square => commands::square::run(config, &mut out)?,
        Command::Verify => verify::run(config, &mut out)?,
    }
    Ok(out)
}
