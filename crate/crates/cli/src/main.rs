//! `folner`: batch front end for Følner certificates, kernel-dimension
//! estimates, spectral densities and relative-dimension tables.
//!
//! Exit codes: 0 success, 1 certificate failure, 2 configuration error,
//! 3 numerical-backend failure.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CommandName, FileConfig, Format, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "folner", version, about = "Følner-window approximation of von Neumann dimensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the strong Følner condition on each scheduled window.
    Verify(Flags),
    /// Estimate dim ker T from the kernel dimensions of window compressions.
    Kernel(Flags),
    /// Eigenvalue histogram of the square compression of a self-adjoint T.
    Density(Flags),
    /// Table of window sizes and relative dimensions.
    Dimreport(Flags),
}

#[derive(clap::Args, Default)]
struct Flags {
    /// JSON run description; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in model name (`z2`, `cyclic:6`, `rotation:0.25`, …) or model file.
    #[arg(long)]
    model: Option<String>,
    /// Operator document; repeat for several operators.
    #[arg(long = "operator")]
    operators: Vec<PathBuf>,
    /// Window schedule: `50`, `2,4,8`, `2..20` or `2..20:2`.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    /// `exact` or `float`.
    #[arg(long)]
    backend: Option<String>,
    /// Relative singular-value cutoff for the floating backend.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Histogram bins for `density`.
    #[arg(long)]
    bins: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Report file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Add a heuristic a + c/n extrapolation to `kernel`.
    #[arg(long)]
    extrapolate: bool,
    /// Record wall time per window (reports are then not byte-reproducible).
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags) = match cli.command {
        Command::Verify(f) => (CommandName::Verify, f),
        Command::Kernel(f) => (CommandName::Kernel, f),
        Command::Density(f) => (CommandName::Density, f),
        Command::Dimreport(f) => (CommandName::Dimreport, f),
    };
    match execute(name, flags) {
        Ok(code) => ExitCode::from(code),
        Err((code, message)) => {
            eprintln!("folner: {message}");
            ExitCode::from(code)
        }
    }
}

fn execute(name: CommandName, flags: Flags) -> Result<u8, (u8, String)> {
    let config_error = |e: config::ConfigError| (2, e.to_string());
    let (file, base) = match &flags.config {
        Some(path) => (RunConfig::load(path).map_err(config_error)?, path.parent().map(|p| p.to_path_buf())),
        None => (FileConfig::default(), None),
    };
    let overrides = Overrides {
        model: flags.model,
        operators: flags.operators,
        n: flags.n,
        eps: flags.eps,
        backend: flags.backend,
        tolerance: flags.tolerance,
        bins: flags.bins,
        jobs: flags.jobs,
        out: flags.out,
        format: flags.format,
        extrapolate: flags.extrapolate,
        timing: flags.timing,
    };
    let cfg = RunConfig::resolve(name, file, base.as_deref(), overrides).map_err(config_error)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| (3, format!("thread pool: {e}")))?;
    let outcome = pool.install(|| run::run(&cfg)).map_err(|f| (f.exit_code() as u8, f.to_string()))?;

    eprint!("{}", outcome.summary);
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.report).map_err(|e| (2, format!("{}: {e}", path.display())))?,
        None => print!("{}", outcome.report),
    }
    Ok(if outcome.pass { 0 } else { 1 })
}
