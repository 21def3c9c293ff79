mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "kgt", version, about = "Single-vertex 2-graph semigroups: counting, classification, equivalence and Fock-space checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EquivMode {
    Conjugacy,
    Unitary,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Number of product-conjugacy orbits in S_{nm}, or of semigroup classes
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Merge classes related by exchanging the two generator families
        #[arg(long)]
        semigroup_classes: bool,
    },
    /// Write the orbit catalog for an n x m grid
    Classify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        cyclic_only: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide whether two relation permutations give equivalent semigroup algebras
    Equiv {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        tau: String,
        #[arg(long, value_enum, default_value = "unitary")]
        mode: EquivMode,
        /// Re-check the verdict with the independent replay checkers
        #[arg(long)]
        replay: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the truncated Fock space and optionally verify the shift identities
    Fock {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        perm: String,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        verify: bool,
        /// Directory for Matrix Market exports of every shift operator
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = kgt_core::fock::DEFAULT_BASIS_CAP)]
        basis_cap: usize,
    },
    /// Partial norms of the vector ω_α against the closed-form product
    Omega {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        perm: String,
        /// Coordinates per class, classes separated by ';', e.g. "0.5,0;0,0"
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        degree: usize,
        /// Also check the adjoint eigen-relation on the truncated space
        #[arg(long)]
        eigen: bool,
        /// Write the truncated vector as JSON [re, im] pairs
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = kgt_core::fock::DEFAULT_BASIS_CAP)]
        basis_cap: usize,
    },
    /// Ball automorphism moving 0 to α, with its identity suite
    Mobius {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Coordinate permutation of the (n,1) relation; defaults to the identity
        #[arg(long)]
        tau: Option<String>,
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 5)]
        degree: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Relation-set checks
    Kgraph {
        #[command(subcommand)]
        action: KgraphAction,
    },
    /// Diagram statistics and DOT export
    Diagram {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        perm: String,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum KgraphAction {
    /// Unique factorization of a relation set read from JSON
    Check {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("KGT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| CliError::Input(format!("KGT_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Count { n, m, semigroup_classes } => commands::count(n, m, semigroup_classes),
        Command::Classify { n, m, cyclic_only, out } => commands::classify(n, m, cyclic_only, &out),
        Command::Equiv {
            n,
            m,
            theta,
            tau,
            mode,
            replay,
            seed,
            out,
        } => commands::equiv(n, m, &theta, &tau, mode, replay, seed, out.as_deref()),
        Command::Fock {
            n,
            m,
            perm,
            degree,
            verify,
            out_dir,
            basis_cap,
        } => commands::fock(n, m, &perm, degree, verify, out_dir.as_deref(), basis_cap),
        Command::Omega {
            n,
            m,
            perm,
            alpha,
            degree,
            eigen,
            out,
            basis_cap,
        } => commands::omega(n, m, &perm, &alpha, degree, eigen, out.as_deref(), basis_cap),
        Command::Mobius {
            n,
            alpha,
            tau,
            check,
            degree,
            samples,
            seed,
        } => commands::mobius(n, &alpha, tau.as_deref(), check, degree, samples, seed),
        Command::Kgraph {
            action: KgraphAction::Check { spec, max_len },
        } => commands::kgraph_check(&spec, max_len),
        Command::Diagram { n, m, perm, dot } => commands::diagram(n, m, &perm, dot.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Unknown) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
