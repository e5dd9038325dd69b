//! Library side of the `lrspca` binary.

pub mod bench;
pub mod input;
pub mod report;
pub mod verify;

use std::path::Path;
use std::time::Instant;

use lowrank_spca::{solve_factors, Algorithm, Tolerances};

pub use input::{InputFormat, LoadedInput};
pub use report::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Dimension(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] lowrank_spca::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Parse(_) => "parse",
            CliError::Dimension(_) => "dimension_mismatch",
            CliError::Usage(_) => "usage",
            CliError::Solver(e) => e.kind(),
        }
    }

    /// 2 for bad usage, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// Single machine-parsable line.
    pub fn line(&self) -> String {
        format!("error={} message={:?}", self.kind(), self.to_string())
    }
}

/// Options of `lrspca solve`.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub format: InputFormat,
    pub k: usize,
    pub sigma: f64,
    pub rank: Option<usize>,
    pub algorithm: Algorithm,
    pub deterministic: bool,
}

pub fn run_solve(path: &Path, opts: &SolveOptions) -> Result<RunReport, CliError> {
    let tol = Tolerances::default();
    let loaded = input::load(path, opts.format, opts.rank, opts.sigma, tol.rank)?;
    let (n, d) = (loaded.factors.rows(), loaded.factors.cols());
    let start = Instant::now();
    let report = solve_factors(loaded.factors, opts.k, opts.sigma, opts.algorithm, tol)?;
    let elapsed = if opts.deterministic {
        0.0
    } else {
        start.elapsed().as_secs_f64()
    };
    Ok(RunReport::new(
        path.display().to_string(),
        loaded.format.as_str(),
        opts.algorithm.as_str(),
        n,
        d,
        opts.k,
        opts.sigma,
        &report,
        elapsed,
    ))
}

/// Reads `LRSPCA_THREADS` and sizes the global pool accordingly.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LRSPCA_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("LRSPCA_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
