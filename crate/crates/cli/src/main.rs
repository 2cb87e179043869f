//! `rs-chain`: solve retailer-supplier chains, build their cooperative
//! games, analyze the core, and compare profit allocations.
//!
//! Exit codes: 0 success or verdict, 1 property/verification failure,
//! 2 input error.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{cmd_allocate, cmd_core, cmd_game, cmd_solve, cmd_verify, VerifyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Parser)]
#[command(name = "rs-chain", version, about = "Retailer-supplier distribution chain solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Chain instance (JSON), optionally with candidate allocation/prices.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Decimal places in table output (0..=12).
    #[arg(long, default_value_t = 6, value_parser = parse_precision)]
    precision: usize,
    /// Comparison tolerance override (also: env RS_CHAIN_TOL).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Chain instances to include in the suite (repeatable).
    #[arg(long)]
    input: Vec<PathBuf>,
    /// A characteristic-function table to structure-check.
    #[arg(long)]
    game: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of seeded random instances.
    #[arg(long, default_value_t = 50)]
    instances: usize,
    /// Retailer counts cycle 1..=max-n.
    #[arg(long = "max-n", default_value_t = 3, value_parser = clap::value_parser!(usize))]
    max_n: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal order sizes and profits per retailer.
    Solve(CommonArgs),
    /// The induced cooperative game with its structural checks.
    Game(CommonArgs),
    /// Core description, candidate verdicts, and the price correspondence.
    Core(CommonArgs),
    /// mgpc, altruistic and Shapley allocations side by side.
    Allocate(CommonArgs),
    /// Property suite over instances and seeded random chains.
    Verify(VerifyArgs),
}

fn parse_precision(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v > 12 {
        return Err("precision must be within 0..=12".into());
    }
    Ok(v)
}

/// Flag, then environment, then the library default.
fn comparison_tol(flag: Option<f64>) -> Result<f64, String> {
    let from_env = match std::env::var("RS_CHAIN_TOL") {
        Ok(text) => {
            Some(text.parse::<f64>().map_err(|e| format!("RS_CHAIN_TOL must be a number: {e}"))?)
        }
        Err(_) => None,
    };
    let tol = flag.or(from_env).unwrap_or(rs_chain_core::tol::CMP_EPS);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(format!("tolerance must be positive and finite, got {tol}"));
    }
    Ok(tol)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => {
            // The comparison tolerance is accepted for interface uniformity
            // but solving itself has no tolerance knob.
            comparison_tol(args.tol)
                .and_then(|_| cmd_solve(&args.input, args.format, args.precision))
        }
        Command::Game(args) => comparison_tol(args.tol)
            .and_then(|eps| cmd_game(&args.input, args.format, args.precision, eps)),
        Command::Core(args) => comparison_tol(args.tol)
            .and_then(|eps| cmd_core(&args.input, args.format, args.precision, eps)),
        Command::Allocate(args) => comparison_tol(args.tol)
            .and_then(|eps| cmd_allocate(&args.input, args.format, args.precision, eps)),
        Command::Verify(args) => comparison_tol(args.tol).and_then(|eps| {
            cmd_verify(VerifyOptions {
                inputs: args.input,
                game: args.game,
                seed: args.seed,
                instances: args.instances,
                max_retailers: args.max_n.clamp(1, 6),
                format: args.format,
                eps,
            })
        }),
    };
    match outcome {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
