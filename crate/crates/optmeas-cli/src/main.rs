use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use optmeas_cli::commands::{
    cmd_check, cmd_converge, cmd_design, cmd_diameter, cmd_points, PointKind,
};
use optmeas_cli::config::ExperimentConfig;
use optmeas_cli::{util, RunError};

/// Optimal measures on discretized compact sets: solve designs, build
/// extremal point families, estimate transfinite diameters, and run weak-*
/// convergence experiments.
#[derive(Parser)]
#[command(name = "optmeas", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `outputs` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker cap for degree-level parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Seed override for randomized suites.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the optimal measure for each configured degree.
    Design(Common),
    /// Construct extremal point families (fekete or leja).
    Points {
        /// Family kind: fekete or leja.
        kind: String,
        /// Leja prefix length (defaults to the basis dimension N).
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the weighted transfinite diameter along both routes.
    Diameter(Common),
    /// Weak-* convergence diagnostics against a reference measure.
    Converge {
        /// Reference name: arcsine_interval or uniform_circle.
        reference: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the cross-module invariant suite.
    Check(Common),
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf, usize), RunError> {
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out_dir = common.out.clone().unwrap_or_else(|| config.outputs.clone());
    let workers = common.workers.unwrap_or(1);
    Ok((config, out_dir, workers))
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Design(common) => {
            let (config, out_dir, workers) = load(&common)?;
            cmd_design(&config, &out_dir, workers)
        }
        Command::Points {
            kind,
            count,
            common,
        } => {
            let kind = PointKind::parse(&kind)?;
            let (config, out_dir, workers) = load(&common)?;
            cmd_points(&config, &out_dir, workers, kind, count)
        }
        Command::Diameter(common) => {
            let (config, out_dir, workers) = load(&common)?;
            cmd_diameter(&config, &out_dir, workers)
        }
        Command::Converge { reference, common } => {
            let (config, out_dir, workers) = load(&common)?;
            cmd_converge(&config, &out_dir, workers, &reference)
        }
        Command::Check(common) => {
            let (config, out_dir, _workers) = load(&common)?;
            cmd_check(&config, &out_dir)
        }
    }
}

fn main() -> ExitCode {
    util::init_logging();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("optmeas: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
