//! `beamswarm`: spacing designer and sweep runner.
//!
//! Exit codes: 0 success, 1 invalid configuration or input, 2 no feasible
//! spacing, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser)]
#[command(name = "beamswarm", version, about = "LEO swarm downlink simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the orthogonalizing inter-satellite distance as CSV.
    Spacing(SpacingArgs),
    /// Sweep the inter-satellite distance.
    SweepDs(SweepArgs),
    /// Sweep the total transmit power.
    SweepPower(SweepArgs),
    /// Evaluate snapshots along a pass.
    Pass(SweepArgs),
    /// Parse and validate a scenario file, then print its digest.
    ValidateConfig(ConfigArgs),
}

#[derive(Args)]
struct SpacingArgs {
    /// Elevation of the leading satellite, degrees.
    #[arg(long, conflicts_with_all = ["from", "to"])]
    theta_deg: Option<f64>,
    /// Start of an elevation grid, degrees.
    #[arg(long, requires = "to")]
    from: Option<f64>,
    /// End of an elevation grid (inclusive), degrees.
    #[arg(long, requires = "from")]
    to: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    /// Receive antennas.
    #[arg(long, default_value_t = 100)]
    nr: usize,
    /// Orbit altitude, km.
    #[arg(long, default_value_t = 600.0)]
    d0_km: f64,
    /// Harmonic of the orthogonality condition.
    #[arg(long, default_value_t = 1)]
    k: u32,
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override a scenario key, e.g. `--set sweep.values=[10,20]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory for result files.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spacing(a) => commands::spacing(&a),
        Command::SweepDs(a) => commands::sweep(&a, commands::SweepKind::Distance),
        Command::SweepPower(a) => commands::sweep(&a, commands::SweepKind::Power),
        Command::Pass(a) => commands::sweep(&a, commands::SweepKind::Pass),
        Command::ValidateConfig(a) => commands::validate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
