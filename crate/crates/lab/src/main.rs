use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twowell_lab::{init_threads, run, Command, ExperimentConfig, LabError, Overrides};

/// Relaxation, free-boundary minimizers and minimality certificates for a
/// two-well elastic energy.
#[derive(Parser)]
#[command(name = "twowell", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replace the resolution ladder by this single grid size.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Multiply every tolerance by this factor.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// f, Φ, Φ** and QW0 along the dilatation ray, and the common tangent.
    Envelope,
    /// Simple laminate attaining QW0 at the loading.
    Laminate,
    /// Grid minimizer for the configured inclusion, certificate and convergence table.
    Minimizer,
    /// Hashin-type packing of coated balls.
    Hashin,
    /// Truncated moment fits for the square inclusion.
    Square,
    /// Property suite over all modules; exit 0 iff every check passes.
    Verify,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Envelope => Command::Envelope,
            Cmd::Laminate => Command::Laminate,
            Cmd::Minimizer => Command::Minimizer,
            Cmd::Hashin => Command::Hashin,
            Cmd::Square => Command::Square,
            Cmd::Verify => Command::Verify,
        }
    }
}

fn execute(cli: &Cli) -> Result<(), LabError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    config.apply(&Overrides {
        output: cli.out.clone(),
        seed: cli.seed,
        resolution: cli.resolution,
        tolerance: cli.tolerance,
    })?;
    init_threads()?;
    let out = run(cli.command.into(), &config)?;
    for path in out.written() {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
