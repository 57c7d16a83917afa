use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use posys::performance::NormKind;
use posys::Error;

mod commands;
mod demo;
mod presets;
mod report;

use report::Report;

#[derive(Parser)]
#[command(name = "posys", version, about = "Certificates, norms and synthesis for positive linear systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Source {
    /// Model file (JSON).
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Built-in model used when no --input is given.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Write a machine-readable report here.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "inf")]
    Inf,
}

impl From<PArg> for NormKind {
    fn from(p: PArg) -> Self {
        match p {
            PArg::One => NormKind::One,
            PArg::Two => NormKind::Two,
            PArg::Inf => NormKind::Inf,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Stability verdict with ξ, z and diagonal P certificates.
    Stability {
        #[command(flatten)]
        source: Source,
    },
    /// Induced norm read off the static gain.
    Norm {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "inf")]
        p: PArg,
    },
    /// Certificate for an induced-norm bound γ.
    Certify {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        gamma: f64,
        #[arg(long, value_enum, default_value = "inf")]
        p: PArg,
    },
    /// Structured diagonal gain synthesis.
    Synthesize {
        #[command(flatten)]
        source: Source,
        /// Meet this bound instead of minimizing it.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Dominance test or dominated-interconnection synthesis.
    Dominance {
        #[command(flatten)]
        source: Source,
        /// Frequency samples for the cross-check.
        #[arg(long, value_name = "N")]
        grid: Option<usize>,
    },
    /// The four equivalent KYP conditions.
    Kyp {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_name = "N")]
        grid: Option<usize>,
    },
    /// Edge-wise decomposition of a negative semidefinite Metzler matrix.
    Decompose {
        #[command(flatten)]
        source: Source,
        /// Reconstruction tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Positive quadratic program, primal and dual.
    Pqp {
        #[command(flatten)]
        source: Source,
        /// Largest accepted duality gap.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Check a stability certificate node by node.
    DistVerify {
        #[command(flatten)]
        source: Source,
    },
    /// Compute a stability certificate by neighbour message passing.
    DistCertify {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        step: Option<f64>,
        /// Target relative slack per node.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_rounds: usize,
        /// Write per-round records as JSON lines.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Worked examples with expected values.
    Demo {
        /// transport, formation, formation-inertial or power-flow; all when omitted.
        #[arg(long, value_name = "NAME")]
        preset: Option<String>,
        /// Power network replacing the default for power-flow.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
}

fn run(cmd: Command) -> posys::Result<(Report, Option<PathBuf>)> {
    Ok(match cmd {
        Command::Stability { source } => (commands::stability(&source)?, source.json),
        Command::Norm { source, p } => (commands::norm(&source, p.into())?, source.json),
        Command::Certify { source, gamma, p } => (commands::certify(&source, gamma, p.into())?, source.json),
        Command::Synthesize { source, gamma } => (commands::synthesize(&source, gamma)?, source.json),
        Command::Dominance { source, grid } => (commands::dominance(&source, grid)?, source.json),
        Command::Kyp { source, grid } => (commands::kyp(&source, grid)?, source.json),
        Command::Decompose { source, tol } => (commands::decompose(&source, tol)?, source.json),
        Command::Pqp { source, tol } => (commands::pqp(&source, tol)?, source.json),
        Command::DistVerify { source } => (commands::dist_verify(&source)?, source.json),
        Command::DistCertify { source, step, tol, max_rounds, trace } => {
            (commands::dist_certify(&source, step, tol, max_rounds, trace.as_deref())?, source.json)
        }
        Command::Demo { preset, input, json } => (demo::run(preset.as_deref(), input.as_deref())?, json),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((report, json)) => {
            print!("{}", report.human());
            if let Some(path) = json {
                if let Err(e) = std::fs::write(&path, report.machine_string()) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if report.positive { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Infeasible(_) | Error::Unstable(_) | Error::NotNegativeSemidefinite(_) => 1,
                _ => 2,
            })
        }
    }
}
