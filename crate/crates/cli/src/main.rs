mod commands;
mod error;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};


#[derive(Parser, Debug)]
#[command(name = "qbplab", version, about = "Quantum branching programs: build, validate, simulate, analyse")]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a program against the rules of its mode.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = qbplab::DEFAULT_TOL)]
        tol: f64,
    },
    /// Step-bounded output probabilities on one input.
    Eval {
        file: PathBuf,
        #[arg(long)]
        input: String,
        /// Number of evolution steps (default: depth, or 100 for cyclic programs).
        #[arg(long)]
        steps: Option<usize>,
        /// Write the per-step halting trace as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Unbounded-time output probabilities and running times.
    Abs {
        file: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value_t = AbsMethod::Iterate)]
        method: AbsMethod,
        #[arg(long, default_value_t = 1e-10)]
        delta: f64,
        #[arg(long, default_value_t = 1_000_000)]
        tmax: usize,
        #[arg(long, default_value_t = 1e-12)]
        tail: f64,
    },
    /// Construct a program family and write it to a file.
    Build(BuildArgs),
    /// Rewrite a program.
    Transform {
        #[arg(value_enum)]
        kind: TransformKind,
        input: PathBuf,
        output: PathBuf,
        /// Step bound (levelize) or clock parameter (clock).
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 2)]
        copies: usize,
        #[arg(long, default_value = "all-accept")]
        combiner: String,
    },
    /// Shortest gate word approximating a unitary.
    Gatesearch {
        #[arg(long)]
        dim: usize,
        /// JSON matrix: rows of [re, im] pairs.
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        /// Compare without optimizing the global phase.
        #[arg(long)]
        strict: bool,
    },
    /// Simulate or compile a quantum Turing machine.
    Qtm {
        #[arg(value_enum)]
        action: QtmAction,
        spec: PathBuf,
        #[arg(long)]
        input: Option<String>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Batch experiments with CSV output.
    Experiment(ExperimentArgs),
    /// Exact reference computations.
    Oracle {
        #[command(subcommand)]
        query: OracleQuery,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AbsMethod {
    Iterate,
    Damped,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Fig1,
    Disj,
    Ip,
    Perm,
    Ind,
    Isa,
    GmDisj,
    GmIp,
    Tree,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    /// Failure probability of the zero-error IND program.
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    /// Number of primes in the PERM fingerprint (default: n).
    #[arg(long)]
    pub primes: Option<usize>,
    /// Function for `tree` (disj, ip, perm, ind, isa, det, xor).
    #[arg(long, default_value = "disj")]
    pub function: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransformKind {
    Levelize,
    Realify,
    Clock,
    Amplify,
    Rand2gm,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum QtmAction {
    Simulate,
    Compile,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    PermError,
    Entropy,
    Scheme,
    Kstable,
    Clock,
    MinObdd,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub kind: ExperimentKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub csv: PathBuf,
    /// Function family (entropy, scheme, kstable, min-obdd).
    #[arg(long, default_value = "disj")]
    pub function: String,
    /// Stability parameter for kstable (all k up to this value).
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Recognition probability for entropy.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Failure probability for the IND scheme.
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    /// Largest clock parameter for clock.
    #[arg(long, default_value_t = 12)]
    pub t: u32,
    #[arg(long)]
    pub primes: Option<usize>,
    /// Sample this many inputs instead of enumerating all.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: QBPLAB_JOBS or the number of CPUs).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum OracleQuery {
    /// Minimal OBDD size for a variable order.
    MinObdd {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        /// Comma-separated variable order (default: natural).
        #[arg(long)]
        order: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qbplab: {e}");
            e.exit_code()
        }
    }
}
