//! Randomized comparison of every applicable algorithm with exhaustive search.

use std::fmt::Write;

use lowrank_spca::combinatorics::binomial;
use lowrank_spca::{brute_force_factors, solve_detailed, Algorithm, Error, FactorMatrix, ProblemInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::CliError;

pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KMode {
    /// Every sparsity from 1 to N.
    All,
    /// One uniformly drawn sparsity per trial.
    Random,
    /// `round(sqrt(N))`.
    Sqrt,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub n: usize,
    pub d: usize,
    pub k: Option<usize>,
    pub k_mode: KMode,
    pub trials: usize,
    pub seed: u64,
    pub cap: u128,
}

#[derive(Debug, Clone)]
pub struct VerifySummary {
    pub matched: usize,
    pub trials: usize,
    pub text: String,
}

impl VerifySummary {
    pub fn all_match(&self) -> bool {
        self.matched == self.trials
    }
}

/// Generator for trial `t`: an independent stream of the master seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn normal_factors(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FactorMatrix {
    let data = (0..n * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    FactorMatrix::new(n, d, data).expect("finite normal samples")
}

fn sparsities(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if let Some(k) = opts.k {
        return vec![k];
    }
    match opts.k_mode {
        KMode::All => (1..=opts.n).collect(),
        KMode::Random => vec![rng.random_range(1..=opts.n)],
        KMode::Sqrt => vec![((opts.n as f64).sqrt().round() as usize).clamp(1, opts.n)],
    }
}

struct TrialOutcome {
    matched: bool,
    line: String,
}

fn run_trial(opts: &VerifyOptions, trial: usize) -> Result<TrialOutcome, CliError> {
    let mut rng = trial_rng(opts.seed, trial as u64);
    let v = normal_factors(&mut rng, opts.n, opts.d);
    let ks = sparsities(opts, &mut rng);
    let algorithms: &[Algorithm] = if opts.d == 2 {
        &Algorithm::ALL
    } else {
        &[Algorithm::Auto, Algorithm::RankD]
    };
    let mut worst: f64 = 0.0;
    let mut mismatches = Vec::new();
    for &k in &ks {
        let inst = ProblemInstance::new(v.clone(), k, 0.0)?;
        let oracle = brute_force_factors(inst.factors(), inst.sparsity(), opts.cap)?.value;
        for &alg in algorithms {
            let got = solve_detailed(&inst, alg)?.solution.objective_singular;
            let rel = (got - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            if rel > REL_TOL {
                mismatches.push(format!("k={k}:{alg}"));
            }
        }
    }
    let k_desc = if ks.len() == 1 {
        ks[0].to_string()
    } else {
        format!("1..{}", opts.n)
    };
    let status = if mismatches.is_empty() {
        "match".to_string()
    } else {
        format!("mismatch[{}]", mismatches.join(" "))
    };
    Ok(TrialOutcome {
        matched: mismatches.is_empty(),
        line: format!("trial={trial} k={k_desc} max_rel_err={worst:e} status={status}"),
    })
}

pub fn run_verify(opts: &VerifyOptions) -> Result<VerifySummary, CliError> {
    if opts.n == 0 || opts.d == 0 {
        return Err(CliError::Usage("--n and --d must be positive".into()));
    }
    if let Some(k) = opts.k {
        if k == 0 || k > opts.n {
            return Err(Error::InvalidSparsity { k, n: opts.n }.into());
        }
    }
    let worst_k = match (opts.k, opts.k_mode) {
        (Some(k), _) => k,
        (None, KMode::Sqrt) => ((opts.n as f64).sqrt().round() as usize).clamp(1, opts.n),
        (None, _) => opts.n / 2,
    };
    let count = binomial(opts.n, worst_k);
    if count > opts.cap {
        return Err(Error::OracleCapExceeded {
            n: opts.n,
            k: worst_k,
            count,
            cap: opts.cap,
        }
        .into());
    }
    let outcomes: Vec<TrialOutcome> = (0..opts.trials)
        .into_par_iter()
        .map(|t| run_trial(opts, t))
        .collect::<Result<_, _>>()?;
    let matched = outcomes.iter().filter(|o| o.matched).count();
    let mut text = format!("n={} d={} trials={} seed={}\n", opts.n, opts.d, opts.trials, opts.seed);
    for o in &outcomes {
        text.push_str(&o.line);
        text.push('\n');
    }
    let _ = writeln!(text, "{matched}/{} match", opts.trials);
    Ok(VerifySummary {
        matched,
        trials: opts.trials,
        text,
    })
}
