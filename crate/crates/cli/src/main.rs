//! `entclt`: drive the entropic CLT laboratory from a JSON configuration.
//!
//! Exit codes: 0 when every verdict passes, 1 when at least one fails,
//! 2 on configuration or runtime errors.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Overrides};

#[derive(Parser, Debug)]
#[command(
    name = "entclt",
    version,
    about = "Relative entropy, Fisher information and Poincaré constants along the CLT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Grid size, a power of two >= 1024.
    #[arg(long = "n-points", global = true)]
    n_points: Option<usize>,
    /// Zero every tolerance.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Moments, entropy and Fisher information of each family.
    Profile,
    /// Bound verdicts over families x d_list x n_list.
    Clt,
    /// de Bruijn residuals and Fisher decay along the Ornstein–Uhlenbeck flow.
    Flow,
    /// The named invariant battery.
    Verify {
        /// Only run this check group (repeatable).
        #[arg(long = "group")]
        groups: Vec<String>,
        /// Also validate this `x,density` CSV file (repeatable).
        #[arg(long = "density")]
        density_files: Vec<PathBuf>,
        /// Print the check names and exit.
        #[arg(long)]
        list: bool,
    },
    /// Poincaré constants with the Muckenhoupt sandwich.
    Poincare,
}

fn run(cli: Cli) -> Result<bool> {
    let mut overrides = Overrides {
        out: cli.common.out,
        jobs: cli.common.jobs,
        n_points: cli.common.n_points,
        strict: cli.common.strict,
        ..Default::default()
    };
    if let Command::Verify {
        groups,
        density_files,
        list,
    } = &cli.command
    {
        if *list {
            for (g, n) in entclt::checks::check_names() {
                println!("{g}.{n}");
            }
            return Ok(true);
        }
        overrides.groups = groups.clone();
        overrides.density_files = density_files.clone();
    }
    let cfg = ExperimentConfig::load(cli.common.config.as_deref())?.resolve(&overrides)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().context("starting the worker pool")?;
    pool.install(|| match cli.command {
        Command::Profile => commands::cmd_profile(&cfg),
        Command::Clt => commands::cmd_clt(&cfg),
        Command::Flow => commands::cmd_flow(&cfg),
        Command::Verify { .. } => commands::cmd_verify(&cfg),
        Command::Poincare => commands::cmd_poincare(&cfg),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
