use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lowrank_spca::Algorithm;
use lrspca::bench::{run_bench, BenchOptions, KRule};
use lrspca::verify::{run_verify, KMode, VerifyOptions};
use lrspca::{configure_threads, run_solve, CliError, InputFormat, SolveOptions};

/// Exact sparse principal components of low-rank PSD matrices.
///
/// Thread count follows LRSPCA_THREADS when set.
#[derive(Parser)]
#[command(name = "lrspca", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance read from a text file.
    Solve(SolveArgs),
    /// Compare all algorithms with exhaustive search on random instances.
    Verify(VerifyArgs),
    /// Rank-2 sweep statistics as CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// File with "N D" then N rows, or "N" then an N x N matrix.
    matrix: PathBuf,
    /// Input holds the factor matrix V (default).
    #[arg(long, conflicts_with = "covariance")]
    factors: bool,
    /// Input holds the full matrix; requires --rank.
    #[arg(long, requires = "rank")]
    covariance: bool,
    #[arg(long)]
    k: usize,
    /// Diagonal shift; subtracted before factoring a covariance input.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    sigma: f64,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value = "auto")]
    algorithm: Algorithm,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report zero wall time so output is reproducible byte for byte.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Fixed sparsity; overrides --k-mode.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "all")]
    k_mode: KMode,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest C(N, K) the exhaustive search accepts.
    #[arg(long, default_value_t = 2_000_000)]
    cap: u128,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
    n_list: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "const20")]
    k_rule: Vec<KRule>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave out the vertex enumeration timings.
    #[arg(long)]
    skip_rankd: bool,
    /// Write zero timings so output is reproducible byte for byte.
    #[arg(long)]
    deterministic: bool,
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Solve(a) => {
            let opts = SolveOptions {
                format: if a.covariance {
                    InputFormat::Covariance
                } else {
                    InputFormat::Factors
                },
                k: a.k,
                sigma: a.sigma,
                rank: a.rank,
                algorithm: a.algorithm,
                deterministic: a.deterministic,
            };
            let report = run_solve(&a.matrix, &opts)?;
            emit(&report.render(), a.out.as_ref())?;
            Ok(true)
        }
        Command::Verify(a) => {
            let summary = run_verify(&VerifyOptions {
                n: a.n,
                d: a.d,
                k: a.k,
                k_mode: a.k_mode,
                trials: a.trials,
                seed: a.seed,
                cap: a.cap,
            })?;
            print!("{}", summary.text);
            Ok(summary.all_match())
        }
        Command::Bench(a) => {
            let (_, csv) = run_bench(&BenchOptions {
                n_list: a.n_list,
                k_rules: a.k_rule,
                trials: a.trials,
                seed: a.seed,
                skip_rankd: a.skip_rankd,
                deterministic: a.deterministic,
            })?;
            emit(&csv, a.out.as_ref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
