use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cstar_cli::commands;
use cstar_cli::workspace::Overrides;
use cstar_cli::{CliError, Output};
use cstar_core::verifier::PolyhedronMode;
use cstar_core::Mode;

/// C*-convex hull membership, distances and polyhedron verification in M_d.
///
/// Results are printed as canonical JSON on stdout. Exit codes: 0 decided,
/// 1 failed check, 2 usage or parse error, 3 validation failure, 4 undecided.
#[derive(Parser)]
#[command(name = "cstar-hull", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolverArgs {
    /// JSON file of solver settings; missing fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Feasibility tolerance for member witnesses.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, env = "CSTAR_HULL_SEED")]
    seed: Option<u64>,
}

impl SolverArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            config: self.config.clone(),
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct Query {
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// exact (C*-convex) or sub (C*-absolutely convex).
    #[arg(long, default_value = "exact")]
    mode: Mode,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a Kraus combination over a family.
    Eval {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        combination: PathBuf,
    },
    /// Decide whether a target lies in the hull of a family.
    Member(Query),
    /// Bracket the operator-norm distance from a target to the hull.
    Dist(Query),
    /// Check every element against the hull of the others.
    Verify {
        #[arg(long)]
        family: PathBuf,
        /// cstar (hull of the others) or cstar0 (hull of the others and 0).
        #[arg(long, default_value = "cstar")]
        mode: PolyhedronMode,
        /// Worker threads for the per-element queries.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check a separation certificate, or search for one.
    Certify {
        #[command(flatten)]
        query: Query,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Print the first N terms of the lambda sequence.
    Lambda { count: usize },
    /// Replay the built-in example corpus.
    Examples {
        /// Also write the corpus input files into this directory.
        #[arg(long)]
        export: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Compare solver verdicts with exact scalar and diagonal oracles.
    OracleCompare {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn run(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Eval {
            family,
            combination,
        } => commands::eval(&family, &combination),
        Command::Member(q) => commands::member(
            &q.family,
            &q.target,
            q.mode,
            q.solver.overrides().resolve()?,
        ),
        Command::Dist(q) => commands::dist(
            &q.family,
            &q.target,
            q.mode,
            q.solver.overrides().resolve()?,
        ),
        Command::Verify {
            family,
            mode,
            jobs,
            solver,
        } => {
            if jobs == Some(0) {
                return Err(CliError::usage("--jobs must be positive"));
            }
            commands::verify(&family, mode, solver.overrides().resolve()?, jobs)
        }
        Command::Certify {
            query: q,
            certificate,
        } => commands::certify(
            &q.family,
            &q.target,
            certificate.as_deref(),
            q.mode,
            q.solver.overrides().resolve()?,
        ),
        Command::Lambda { count } => commands::lambda(count),
        Command::Examples { export, solver } => commands::examples(
            solver.overrides().resolve()?,
            export.as_deref(),
            &mut io::stderr(),
        ),
        Command::OracleCompare { instances, solver } => {
            commands::oracle_compare(instances, solver.overrides().resolve()?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            let _ = writeln!(stdout, "{}", out.json);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
