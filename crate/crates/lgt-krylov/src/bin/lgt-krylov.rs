//! Command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lgt_krylov::commands;
use lgt_krylov::config::ExperimentConfig;
use lgt_krylov::CliResult;

#[derive(Parser)]
#[command(
    name = "lgt-krylov",
    version,
    about = "Krylov ground-state experiments and resource estimates for the lattice Schwinger model"
)]
struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true, env = "LGTK_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides `output.workers`).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Noise seed base (overrides `sweep.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Solve on exact moments (sets `sweep.noiseless`).
    #[arg(long, global = true)]
    noiseless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print sizes, term counts and reference energies; with --out, also
    /// write the Pauli list and the moments.
    ModelInfo,
    /// Run the noise grid.
    Sweep,
    /// Tabulate gate counts and hardware runtimes.
    Resources,
    /// Fit sweep or requirement tables and cost the campaigns.
    Fit {
        /// Input tables; defaults to `<out>/results.csv`.
        inputs: Vec<PathBuf>,
    },
    /// Sweep, fit and resources in one go.
    Pipeline,
}

fn run(cli: Cli) -> CliResult<String> {
    let out_given = cli.out.is_some();
    let env = std::env::vars().filter(|(k, _)| k != "LGTK_CONFIG");
    let mut cfg = ExperimentConfig::load(cli.config.as_deref(), env)?;
    if let Some(o) = cli.out {
        cfg.output.dir = o;
    }
    if let Some(w) = cli.workers {
        cfg.output.workers = w;
    }
    if let Some(s) = cli.seed {
        cfg.sweep.seed = s;
    }
    if cli.noiseless {
        cfg.sweep.noiseless = true;
    }
    cfg.validate()?;
    let out = cfg.output.dir.clone();
    match cli.command {
        Command::ModelInfo => commands::model_info(&cfg, out_given.then_some(out.as_path())),
        Command::Sweep => commands::sweep(&cfg, &out),
        Command::Resources => commands::resources(&cfg, Some(&out)),
        Command::Fit { inputs } => commands::fit_command(&cfg, &inputs, &out),
        Command::Pipeline => commands::pipeline(&cfg, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
