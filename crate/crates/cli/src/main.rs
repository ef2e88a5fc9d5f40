use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use minent_cli::{run_path, sweep_path, Overrides};

#[derive(Parser)]
#[command(name = "minent", version, about = "Run geometry and entropy experiments from config files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid resolution, overriding the config.
    #[arg(long, global = true)]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run { path: PathBuf },
    /// Repeat an experiment over values of one parameter.
    Sweep {
        path: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides { out: cli.out, seed: cli.seed, grid: cli.grid };
    let code = match cli.command {
        Command::Run { path } => run_path(&path, &overrides),
        Command::Sweep { path, param, values } => {
            let values: Vec<String> = values.into_iter().map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
            sweep_path(&path, &overrides, &param, &values)
        }
    };
    ExitCode::from(code as u8)
}
