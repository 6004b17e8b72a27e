//! `modred` — batch driver for requirement-driven model order reduction of
//! interconnected LTI systems.
//!
//! The pipeline runs in four stages over a shared run directory:
//! `demo-beams` (or externally supplied model/interconnection/requirement
//! files) → `synth` → `reduce` → `validate`, with `bode` emitting plot data
//! at any point after `reduce`. Exit codes: 0 success, 2 I/O or malformed
//! input, 3 requirement translation infeasible, 4 reduction unattainable,
//! 5 validation failure, 1 anything else. Logging is controlled by the
//! `MODRED_LOG` environment variable (`error`, `info`, `debug`, ...).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use modred_core::{Error, Result};

use config::{load_config_file, parse_alpha, parse_elements, parse_grid, ConfigLayer, Settings};

#[derive(Parser)]
#[command(
    name = "modred",
    version,
    about = "Requirement-driven model order reduction for interconnected LTI systems"
)]
struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Run directory artifacts are read from and written to.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Interconnection file (default: <out>/interconnection.json).
    #[arg(long, global = true, value_name = "FILE")]
    interconnection: Option<PathBuf>,

    /// Requirement table (default: <out>/requirement.csv).
    #[arg(long, global = true, value_name = "FILE")]
    requirement: Option<PathBuf>,

    /// Worker threads for frequency sweeps (0 = one per core). Results are
    /// merged in frequency order, so outputs do not depend on this.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the three-beam demo case: models, interconnection, requirement.
    DemoBeams {
        /// Elements per beam (subsystems 2 and 3 need even counts).
        #[arg(long, value_name = "N1,N2,N3")]
        elements: Option<String>,
        /// Requirement grid as lo,hi,n in rad/s.
        #[arg(long, value_name = "LO,HI,N")]
        grid: Option<String>,
        /// Requirement fraction of |G_c|.
        #[arg(long, value_name = "B1")]
        beta1: Option<f64>,
        /// Requirement floor.
        #[arg(long, value_name = "B2")]
        beta2: Option<f64>,
    },
    /// Translate the requirement into per-subsystem channel budgets.
    Synth {
        /// Per-subsystem cost weights.
        #[arg(long, value_name = "A1,A2,...")]
        alpha: Option<String>,
        /// SDP feasibility tolerance.
        #[arg(long, value_name = "TOL")]
        feas_tol: Option<f64>,
        /// Relative cost-decrease threshold that stops the alternation.
        #[arg(long, value_name = "TOL")]
        conv_tol: Option<f64>,
        /// Maximum alternation rounds per frequency.
        #[arg(long, value_name = "N")]
        max_outer: Option<usize>,
    },
    /// Reduce each subsystem against its synthesized budget.
    Reduce {
        /// Balancing method: fwbt (frequency-weighted) or bt (plain).
        #[arg(long, value_name = "NAME")]
        method: Option<String>,
        /// Denominator order of each fitted weight.
        #[arg(long, value_name = "N")]
        fit_order: Option<usize>,
        /// Advisory relative fit-error tolerance.
        #[arg(long, value_name = "TOL")]
        fit_tol: Option<f64>,
    },
    /// Check the reduced pipeline against the requirement (exit 5 on violation).
    Validate,
    /// Emit the interconnected Bode comparison CSV.
    Bode,
}

/// Collect the parsed flags into a config layer.
fn flag_layer(cli: &Cli) -> Result<ConfigLayer> {
    let mut layer = ConfigLayer {
        out: cli.out.clone(),
        interconnection: cli.interconnection.clone(),
        requirement: cli.requirement.clone(),
        workers: cli.workers,
        ..Default::default()
    };
    match &cli.command {
        Cmd::DemoBeams {
            elements,
            grid,
            beta1,
            beta2,
        } => {
            layer.elements = elements.as_deref().map(parse_elements).transpose()?;
            layer.grid = grid.as_deref().map(parse_grid).transpose()?;
            layer.beta1 = *beta1;
            layer.beta2 = *beta2;
        }
        Cmd::Synth {
            alpha,
            feas_tol,
            conv_tol,
            max_outer,
        } => {
            layer.alpha = alpha.as_deref().map(parse_alpha).transpose()?;
            layer.feas_tol = *feas_tol;
            layer.conv_tol = *conv_tol;
            layer.max_outer = *max_outer;
        }
        Cmd::Reduce {
            method,
            fit_order,
            fit_tol,
        } => {
            layer.method = method.clone();
            layer.fit_order = *fit_order;
            layer.fit_tol = *fit_tol;
        }
        Cmd::Validate | Cmd::Bode => {}
    }
    Ok(layer)
}

fn run(cli: &Cli) -> Result<i32> {
    let file = match &cli.config {
        Some(path) => load_config_file(path)?,
        None => ConfigLayer::default(),
    };
    let settings = Settings::resolve(flag_layer(cli)?, file);
    if settings.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(settings.workers)
            .build_global()
            .map_err(|e| Error::Domain(format!("worker pool: {e}")))?;
    }
    match &cli.command {
        Cmd::DemoBeams { .. } => commands::cmd_demo_beams(&settings),
        Cmd::Synth { .. } => commands::cmd_synth(&settings),
        Cmd::Reduce { .. } => commands::cmd_reduce(&settings),
        Cmd::Validate => commands::cmd_validate(&settings),
        Cmd::Bode => commands::cmd_bode(&settings),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Json(_) | Error::Parse(_) => 2,
        Error::Infeasible { .. } => 3,
        Error::Unattainable { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MODRED_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(u8::try_from(code).unwrap_or(1)),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
