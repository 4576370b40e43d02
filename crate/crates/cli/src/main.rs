//! `attrisk` — audit dataset attributes for shortcut-learning risk.
//!
//! Exit codes: 0 on success (including per-attribute soft failures,
//! which are reported as warnings), 2 on configuration or data errors,
//! 1 on an internal panic.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;

use attrisk_core::AuditError;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Anything that should stop the run and exit 2.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(AuditError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser)]
#[command(
    name = "attrisk",
    version,
    about = "Quantify how exploitable each metadata attribute of a dataset is as a learning shortcut",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full audit: attribute utility, detectability, and risk ranking
    Audit(RunArgs),
    /// Attribute↔label association only; trains nothing
    Utility(RunArgs),
    /// Plant a synthetic shortcut and trace worst-case AUC degradation
    Calibrate(CalibrateArgs),
    /// Probe a frozen task model's representation for attribute encoding
    Split(SplitArgs),
    /// Generate synthetic data with analytic ground truth
    Generate(GenerateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Override the config's seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (overrides config and ATTRISK_OUT_DIR)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Prior report.json whose attribute utilities become vertical
    /// markers on the calibration figure
    #[arg(long, value_name = "FILE")]
    markers: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Prior report.json to correlate probe F1 against detectability
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GenerateKind {
    /// Attribute/label pair from an explicit joint distribution
    Joint,
    /// Binary source observed through noisy feature copies
    Channel,
    /// Attribute → label → features
    Chain,
    /// Attribute and a latent cause colliding on the label
    Collider,
}

#[derive(Args)]
struct GenerateArgs {
    /// Which generator to run
    #[arg(long, value_enum)]
    kind: GenerateKind,
    /// Number of rows
    #[arg(long)]
    rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (default: ATTRISK_OUT_DIR or the working directory)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// joint: semicolon-separated rows of comma-separated probabilities,
    /// e.g. "0.4,0.1;0.1,0.4"
    #[arg(long)]
    probs: Option<String>,
    /// channel: per-copy flip probability
    #[arg(long, default_value_t = 0.1)]
    flip: f64,
    /// channel: informative copies
    #[arg(long, default_value_t = 3)]
    copies: usize,
    /// channel: pure-noise columns
    #[arg(long, default_value_t = 0)]
    distractors: usize,
}

/// Cap the worker pool. Determinism does not depend on this — reports
/// are byte-identical at any pool size — it only bounds CPU use.
fn init_jobs(jobs: Option<usize>) -> Result<(), CliError> {
    let Some(jobs) = jobs else { return Ok(()) };
    if jobs == 0 {
        return Err(CliError::Config("jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Audit(args) => {
            init_jobs(args.jobs)?;
            commands::cmd_audit(&args.config, args.seed, &args.out)
        }
        Command::Utility(args) => {
            init_jobs(args.jobs)?;
            commands::cmd_utility(&args.config, args.seed, &args.out)
        }
        Command::Calibrate(args) => {
            init_jobs(args.run.jobs)?;
            commands::cmd_calibrate(&args.run.config, args.run.seed, &args.run.out, &args.markers)
        }
        Command::Split(args) => {
            init_jobs(args.run.jobs)?;
            commands::cmd_split(&args.run.config, args.run.seed, &args.run.out, &args.report)
        }
        Command::Generate(args) => commands::cmd_generate(
            args.kind,
            args.rows,
            args.seed,
            &args.out,
            &args.probs,
            args.flip,
            args.copies,
            args.distractors,
        ),
    }
}

fn main() {
    let code = match std::panic::catch_unwind(run) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(_) => {
            // the default panic hook has already printed the message
            eprintln!("error: internal panic; rerun with RUST_BACKTRACE=1 for details");
            1
        }
    };
    std::process::exit(code);
}
