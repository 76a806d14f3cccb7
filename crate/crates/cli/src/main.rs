//! `scop`: compile networks to diagrams, inspect propagation, solve, benchmark.

mod bench;
mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "scop",
    version,
    about = "Monotone stochastic constraint optimization over OBDDs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile every query of a problem file to an OBDD file.
    Compile(CompileArgs),
    /// Run the derivative and decomposition propagators once, side by side.
    Propagate(PropagateArgs),
    /// Solve a problem file, or a constraint over OBDD files.
    Solve(SolveArgs),
    /// Compare propagators on generated or stored instances.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    pub problem: PathBuf,
    /// Whitespace-separated variable names placed first in the order.
    #[arg(long)]
    pub order_file: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Also write a Graphviz file per query.
    #[arg(long)]
    pub dot: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct PropagateArgs {
    #[arg(required = true)]
    pub obdds: Vec<PathBuf>,
    #[arg(long)]
    pub theta: f64,
    /// Fixed decision, `name=0` or `name=1`; repeatable.
    #[arg(long = "fix", value_name = "NAME=0|1")]
    pub fixes: Vec<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PropagatorArg {
    Incremental,
    Full,
    Naive,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// One problem file, or one or more `.obdd` files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Threshold; turns the input into a satisfaction problem.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub delta: f64,
    #[arg(long)]
    pub cardinality: Option<usize>,
    #[arg(long)]
    pub order_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "incremental")]
    pub propagator: PropagatorArg,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Decision-variable counts (network edges) to generate.
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10, 20])]
    pub size: Vec<usize>,
    /// Instances per size.
    #[arg(long, default_value_t = 3)]
    pub instances: usize,
    /// Read `*.problem` files from this directory instead of generating.
    #[arg(long)]
    pub dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub csv: bool,
    /// Leave out wall-clock columns so output depends only on the inputs.
    #[arg(long)]
    pub no_timing: bool,
}

/// Exit codes: 0 success, 1 usage or input error, 2 unsatisfiable or failed
/// propagation.
fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Compile(a) => commands::compile(&a),
        Command::Propagate(a) => commands::propagate(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Bench(a) => bench::run(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
