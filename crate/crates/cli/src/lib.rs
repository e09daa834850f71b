//! Command-line front end for the su2sigma verification suites.
//!
//! Exit codes: 0 when every check passes, 1 when a residual exceeds its
//! tolerance (the report is still written), 2 on bad input.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{ContractArgs, GeodesicArgs, GroupArgs, OrthoArgs, PoissonArgs, SpectrumArgs, WavefnArgs};
use crate::config::{Format, Overrides, RunConfig, UsageError};
use crate::report::{emit, summarize, Outcome};

#[derive(Debug, Parser)]
#[command(name = "su2sigma", version, about = "Free particle on the SU(2) group manifold: verification suites")]
pub struct Cli {
    /// Sphere radius R
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Particle mass m
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    /// Tolerance override, repeatable
    #[arg(long, global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Quadrature orders
    #[arg(long, global = true, value_name = "NCHI,NTHETA,NPHI")]
    pub grid: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file [default: stdout]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML config file; flags take precedence over it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a geodesic and check conservation and the closed form
    Geodesic(GeodesicArgs),
    /// Group axioms, invariant fields, brackets, quantization form
    Groupcheck(GroupArgs),
    /// Energy levels and eigen-residuals of the basis
    Spectrum(SpectrumArgs),
    /// Gram matrix, hermiticity, level leakage and operator algebra
    Orthonormality(OrthoArgs),
    /// Sample one eigenfunction on the quadrature grid
    Wavefn(WavefnArgs),
    /// Large-radius contraction of the momentum and Hamiltonian
    Contract(ContractArgs),
    /// Poisson algebra of the basic functions
    Poisson(PoissonArgs),
    /// Every suite at its defaults
    All,
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Geodesic(a) => commands::geodesic(cfg, a),
        Command::Groupcheck(a) => commands::groupcheck(cfg, a),
        Command::Spectrum(a) => commands::spectrum_cmd(cfg, a),
        Command::Orthonormality(a) => commands::orthonormality(cfg, a),
        Command::Wavefn(a) => commands::wavefn(cfg, a),
        Command::Contract(a) => commands::contract(cfg, a),
        Command::Poisson(a) => commands::poisson(cfg, a),
        Command::All => commands::all(cfg),
    }
}

fn exit_for(err: &anyhow::Error) -> ExitCode {
    if err.chain().any(|e| e.downcast_ref::<UsageError>().is_some()) {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

/// Parses `args` (program name first), runs the command and writes its
/// report.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let flags = Overrides {
        radius: cli.radius,
        mass: cli.mass,
        tol: cli.tol.clone(),
        grid: cli.grid.clone(),
        seed: cli.seed,
        out: cli.out.clone(),
        format: cli.format,
    };
    let result = RunConfig::resolve(cli.config.as_deref(), &flags).and_then(|cfg| {
        let outcome = dispatch(&cli, &cfg)?;
        emit(&outcome, &cfg)?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            eprint!("{}", summarize(&outcome));
            if let Some(w) = outcome.data.get("accuracy_warning").and_then(|w| w.as_str()) {
                eprintln!("warning: {w}");
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_for(&e)
        }
    }
}
