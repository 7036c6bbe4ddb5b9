use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vofrac::app::{self, RunConfig};

#[derive(Parser)]
#[command(name = "vofrac", about = "Variable-order time-fractional diffusion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed (overrides run.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem.
    Forward,
    /// Synthesize observations.
    Synth,
    /// Recover the order from observations.
    Invert {
        /// Observation file; defaults to <out>/observations.csv.
        #[arg(long)]
        observations: Option<PathBuf>,
    },
    /// Initial-time regularity report.
    Diagnose,
    /// Misfit scan over constant orders.
    Scan,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> vofrac::Result<Vec<PathBuf>> {
    let path =
        cli.config.ok_or_else(|| vofrac::Error::Config { line: None, message: "--config PATH is required".into() })?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.unwrap_or_else(|| cfg.output_dir.clone());
    match cli.command {
        Command::Forward => app::run_forward(&cfg, &out),
        Command::Synth => app::run_synth(&cfg, &out),
        Command::Invert { observations } => {
            let obs = observations.unwrap_or_else(|| out.join(app::OBSERVATIONS_FILE));
            app::run_invert(&cfg, &obs, &out)
        }
        Command::Diagnose => app::run_diagnose(&cfg, &out),
        Command::Scan => app::run_scan(&cfg, &out),
    }
}
