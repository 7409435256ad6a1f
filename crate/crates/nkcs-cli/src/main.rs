//! `nkcs` — coupled-fitness-landscape experiments from the command line.
//!
//! Subcommands: `trace` (one run, trajectory CSV), `sweep` (a grid of
//! cells, results + aggregate CSV), `compare` (Welch verdicts between two
//! results tables), `selfcheck` (brute-force oracle suite). Exit codes:
//! 0 success, 1 usage or config error, 2 execution failure.

mod commands;
mod config;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, CommonOpts};
use config::{Overrides, Sizes};

#[derive(Parser)]
#[command(
    name = "nkcs",
    version,
    about = "Hill-climbing experiments on coupled NK fitness landscapes",
    after_help = "Presets for --config: paper-fig2, paper-fig3, paper-fig4, paper-fig5.\n\
                  The default output directory comes from NKCS_OUT_DIR, else ./nkcs-out."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one cell's first run and write its fitness trajectory
    Trace(RunArgs),
    /// Run a grid of cells and write long-format results and aggregates
    Sweep(RunArgs),
    /// Compare two results tables cell by cell with Welch's t-test
    Compare(CompareArgs),
    /// Run the built-in oracle suite and report each check
    Selfcheck,
}

#[derive(Args)]
struct RunArgs {
    /// Preset name or path to a TOML config file
    #[arg(long)]
    config: Option<String>,

    /// Master seed (overrides the config file)
    #[arg(long)]
    seed: Option<u64>,

    /// Size of the worker pool (default: available cores)
    #[arg(long)]
    workers: Option<usize>,

    /// Output directory (default: $NKCS_OUT_DIR, else ./nkcs-out)
    #[arg(long)]
    out_dir: Option<PathBuf>,

    /// Trajectory sample period in generations (trace only)
    #[arg(long)]
    trace_every: Option<u64>,

    /// Genome length: one integer, or comma-separated per-species sizes
    #[arg(long)]
    n: Option<String>,

    /// Intra-genome epistatic links per gene
    #[arg(long)]
    k: Option<usize>,

    /// Inter-species links per gene per partner
    #[arg(long)]
    c: Option<usize>,

    /// Number of partner species (the ecosystem has S+1 species)
    #[arg(long)]
    s: Option<usize>,

    /// Adoption policy: coev, com, or glob
    #[arg(long)]
    policy: Option<String>,

    /// Vote error probability (com policy only)
    #[arg(long)]
    error_rate: Option<f64>,

    /// Vote error model: collective or per-voter
    #[arg(long)]
    error_mode: Option<String>,

    /// Generations per run
    #[arg(long)]
    generations: Option<u64>,

    /// Landscapes per cell
    #[arg(long)]
    landscapes: Option<usize>,

    /// Restarts per landscape
    #[arg(long)]
    restarts: Option<usize>,
}

impl RunArgs {
    fn into_opts(self) -> Result<CommonOpts, CliError> {
        let n = match &self.n {
            Some(text) => Some(Sizes::parse_flag(text).map_err(CliError::Usage)?),
            None => None,
        };
        Ok(CommonOpts {
            config: self.config,
            out_dir: self.out_dir,
            workers: self.workers,
            overrides: Overrides {
                n,
                k: self.k,
                c: self.c,
                s: self.s,
                policy: self.policy,
                error_rate: self.error_rate,
                error_mode: self.error_mode,
                generations: self.generations,
                master_seed: self.seed,
                trace_every: self.trace_every,
                landscapes: self.landscapes,
                restarts_per_landscape: self.restarts,
            },
        })
    }
}

#[derive(Args)]
struct CompareArgs {
    /// Results CSV for side A
    results_a: PathBuf,

    /// Results CSV for side B
    results_b: PathBuf,

    /// Significance level for the verdicts
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Keep only side A rows with this policy, e.g. 'coev' or 'com@0.25'
    #[arg(long)]
    policy_a: Option<String>,

    /// Keep only side B rows with this policy
    #[arg(long)]
    policy_b: Option<String>,

    /// Output directory (default: $NKCS_OUT_DIR, else ./nkcs-out)
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Trace(args) => commands::cmd_trace(&args.into_opts()?),
        Command::Sweep(args) => commands::cmd_sweep(&args.into_opts()?),
        Command::Compare(args) => commands::cmd_compare(
            &args.results_a,
            &args.results_b,
            args.alpha,
            &args.policy_a,
            &args.policy_b,
            &args.out_dir,
        ),
        Command::Selfcheck => commands::cmd_selfcheck(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses exit code 2 for usage errors; remap to this
            // tool's convention (1 usage, 0 for --help/--version).
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
