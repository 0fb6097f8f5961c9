//! `opscale`: operator Sinkhorn scaling and its companion experiments.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use opscaling::Error;

#[derive(Debug, Parser)]
#[command(name = "opscale", version, about = "Operator Sinkhorn scaling and alternating e-projections")]
pub struct Cli {
    /// Seed for random instances.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Stopping tolerance on the marginal residual.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,

    /// Maximum number of sweeps (one left and one right step each).
    #[arg(long, global = true, default_value_t = 200)]
    pub max_iters: usize,

    /// Output location. A directory for `scale`; a file for the other commands.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Draw random states from the real Gaussian ensemble instead of the complex one.
    #[arg(long, global = true)]
    pub real: bool,

    /// Target for the first marginal (JSON matrix file).
    #[arg(long, global = true, value_name = "FILE")]
    pub target_p: Option<PathBuf>,

    /// Target for the second marginal (JSON matrix file).
    #[arg(long, global = true, value_name = "FILE")]
    pub target_q: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// Where the initial state comes from. Without `--input` or `--paper-rho0`
/// a random state of shape `--dims` is drawn from `--seed`.
#[derive(Debug, Clone, Args)]
pub struct Source {
    /// JSON choi or density file.
    #[arg(long, value_name = "FILE", conflicts_with = "paper_rho0")]
    pub input: Option<PathBuf>,

    /// Use the built-in 2⊗2 reference state.
    #[arg(long)]
    pub paper_rho0: bool,

    /// Keep only the diagonal of the initial state (the classical case).
    #[arg(long)]
    pub diagonal: bool,

    /// Block shape `n,m` of a random instance.
    #[arg(long, value_parser = commands::parse_dims, default_value = "2,2")]
    pub dims: (usize, usize),
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scale one input and report the terminal iterate and residual history.
    Scale {
        #[command(flatten)]
        source: Source,
        /// sld, bkm or burg.
        #[arg(long, default_value = "sld")]
        method: String,
        /// Run exactly `--max-iters` sweeps. Implied by `--paper-rho0`.
        #[arg(long)]
        fixed_iters: bool,
    },
    /// Run all three methods from the same input and tabulate their distances.
    Compare {
        #[command(flatten)]
        source: Source,
        /// Run exactly `--max-iters` sweeps. Implied by `--paper-rho0`.
        #[arg(long)]
        fixed_iters: bool,
    },
    /// Central difference quotients of a divergence at the operator Sinkhorn limit.
    Diffquot {
        #[command(flatten)]
        source: Source,
        /// Divergence tag.
        #[arg(long, default_value = "BS")]
        tag: String,
        /// Direction `A` (JSON matrix file); defaults to diag(1, -1, -1, 1).
        #[arg(long, value_name = "FILE")]
        direction: Option<PathBuf>,
    },
    /// Divergences between limit and input against −log capacity over random trials.
    CapacityScatter {
        /// Number of random trials.
        #[arg(long, default_value_t = 30)]
        trials: usize,
        /// Comma-separated divergence tags.
        #[arg(long, default_value = "UMEGAKI", value_delimiter = ',')]
        tags: Vec<String>,
        /// Block shape `n,n`; the blocks must be square.
        #[arg(long, value_parser = commands::parse_dims, default_value = "2,2")]
        dims: (usize, usize),
        /// Restrict trials to diagonal states.
        #[arg(long)]
        diagonal: bool,
    },
    /// Write a random instance as JSON.
    Gen {
        /// Block shape `n,m`.
        #[arg(long, value_parser = commands::parse_dims, default_value = "2,2")]
        dims: (usize, usize),
        /// choi or density.
        #[arg(long, default_value = "choi")]
        kind: String,
        /// Keep only the diagonal.
        #[arg(long)]
        diagonal: bool,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                Error::Parse(_) | Error::InvalidInput(_) | Error::DimensionMismatch(_) => 2,
                Error::Domain { .. } | Error::Singular { .. } | Error::OutsideCone { .. } => 3,
                Error::Unsupported(_) => 4,
                Error::Convergence { .. } => 5,
            },
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
