use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use csg_core::format::{bounds_json, parse_game};
use csg_core::{AnyGame, Backend, Error, Rational};

mod solve;
mod table;

#[derive(Debug, Parser)]
#[command(name = "csg", version, about = "Solve concurrent and turn-based stochastic games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute values and strategies.
    Solve(SolveArgs),
    /// Report termination bounds.
    Bounds(BoundsArgs),
    /// Parse and validate a game file.
    Validate(GameArgs),
    /// Run plain value iteration.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Safe,
    Reach,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Si,
    Vi,
    Dovetail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    #[value(alias = "floating")]
    Float,
    #[value(alias = "exact")]
    Rational,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Float => Backend::Float,
            BackendArg::Rational => Backend::Rational,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    /// Game file, or `-` for standard input.
    #[arg(long)]
    game: PathBuf,
    #[arg(long, value_enum, default_value = "float")]
    backend: BackendArg,
}

#[derive(Debug, Clone, Args)]
pub struct ObjectiveArgs {
    #[arg(long, value_enum)]
    objective: ObjectiveArg,
    /// Comma-separated safe set (safe) or target set (reach).
    #[arg(long, value_delimiter = ',')]
    states: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    objective: ObjectiveArgs,
    #[arg(long, value_enum, default_value = "dovetail")]
    mode: Mode,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-9)]
    tau_eq: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Result file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Iteration trace file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Compare against value iteration and report the largest gap.
    #[arg(long)]
    check_oracle: bool,
    /// Value-iteration rounds used by --check-oracle.
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    objective: ObjectiveArgs,
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }

    pub fn output(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGame(_) | Error::Parse(_) | Error::UnknownState(_) | Error::Io(_) => {
                Failure::input(e.to_string())
            }
            other => Failure::solver(other.to_string()),
        }
    }
}

pub enum Loaded {
    Float(AnyGame<f64>),
    Exact(AnyGame<Rational>),
}

fn read_game_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::input(format!("reading standard input: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::input(format!("reading {}: {e}", path.display())))
    }
}

pub fn load(args: &GameArgs) -> Result<Loaded, Failure> {
    let text = read_game_text(&args.game)?;
    Ok(match args.backend {
        BackendArg::Float => Loaded::Float(parse_game(&text)?),
        BackendArg::Rational => Loaded::Exact(parse_game(&text)?),
    })
}

pub fn write_json(path: Option<&Path>, doc: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(doc).expect("documents serialize") + "\n";
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::output(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validate(args: &GameArgs) -> Result<u8, Failure> {
    let (kind, n) = match load(args)? {
        Loaded::Float(g) => (kind_of(&g), g.state_names().len()),
        Loaded::Exact(g) => (kind_of(&g), g.state_names().len()),
    };
    println!("valid {kind} game with {n} states");
    Ok(0)
}

fn kind_of<N>(g: &AnyGame<N>) -> &'static str {
    match g {
        AnyGame::Concurrent(_) => "concurrent",
        AnyGame::TurnBased(_) => "turn-based",
    }
}

fn bounds(args: &BoundsArgs) -> Result<u8, Failure> {
    let report = match load(&args.game)? {
        Loaded::Float(g) => csg_core::termination_bounds(&g, args.epsilon)?,
        Loaded::Exact(g) => csg_core::termination_bounds(&g, args.epsilon)?,
    };
    eprint!("{}", table::bounds(&report));
    write_json(args.output.as_deref(), &bounds_json(&report))?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve(args) => solve::solve(&args),
        Command::Bounds(args) => bounds(&args),
        Command::Validate(args) => validate(&args),
        Command::Oracle(args) => solve::oracle(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
