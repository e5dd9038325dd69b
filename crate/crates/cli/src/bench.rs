//! Sweep statistics on random rank-2 instances, written as CSV.

use std::fmt::Write;
use std::time::Instant;

use lowrank_spca::combinatorics::binomial;
use lowrank_spca::{enumerate_candidates, solve_lazy, solve_sorted, CandidateSet, FactorMatrix};

use crate::verify::{normal_factors, trial_rng};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KRule {
    /// `round(sqrt(N))`
    Sqrt,
    /// `round(5 ln N)`
    #[value(name = "5logn")]
    FiveLogN,
    /// 20
    Const20,
}

impl KRule {
    pub fn as_str(self) -> &'static str {
        match self {
            KRule::Sqrt => "sqrt",
            KRule::FiveLogN => "5logn",
            KRule::Const20 => "const20",
        }
    }

    /// Sparsity for `n` rows, rounded and clamped to `[1, n]`.
    pub fn sparsity(self, n: usize) -> usize {
        let raw = match self {
            KRule::Sqrt => (n as f64).sqrt(),
            KRule::FiveLogN => 5.0 * (n as f64).ln(),
            KRule::Const20 => 20.0,
        };
        (raw.round() as usize).clamp(1, n.max(1))
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub n_list: Vec<usize>,
    pub k_rules: Vec<KRule>,
    pub trials: usize,
    pub seed: u64,
    pub skip_rankd: bool,
    pub deterministic: bool,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub rule: KRule,
    pub k: usize,
    pub total_intersections: u128,
    pub mean_intersections_computed: f64,
    pub max_intersections_computed: u64,
    pub mean_distinct_supports: f64,
    pub mean_time_rankd_s: Option<f64>,
    pub mean_time_sorted_s: f64,
    pub mean_time_lazy_s: f64,
}

pub const CSV_HEADER: &str = "n,k_rule,k,trials,total_intersections,mean_intersections_computed,\
max_intersections_computed,mean_distinct_supports,mean_time_rankd_s,mean_time_sorted_s,mean_time_lazy_s";

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn score(set: &CandidateSet, v: &FactorMatrix) -> f64 {
    set.best(v).map_or(0.0, |c| c.value)
}

pub fn bench_row(opts: &BenchOptions, n: usize, rule: KRule, rule_index: usize) -> Result<BenchRow, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("bench needs N >= 2, got {n}")));
    }
    let k = rule.sparsity(n);
    let mut row = BenchRow {
        n,
        rule,
        k,
        total_intersections: 2 * binomial(n, 2),
        mean_intersections_computed: 0.0,
        max_intersections_computed: 0,
        mean_distinct_supports: 0.0,
        mean_time_rankd_s: (!opts.skip_rankd).then_some(0.0),
        mean_time_sorted_s: 0.0,
        mean_time_lazy_s: 0.0,
    };
    let mut disagreements = 0;
    for trial in 0..opts.trials {
        let stream = ((n as u64) << 32) ^ ((rule_index as u64) << 24) ^ trial as u64;
        let v = normal_factors(&mut trial_rng(opts.seed, stream), n, 2);
        let (lazy, t_lazy) = timed(|| solve_lazy(&v, k).map(|(s, c)| (score(&s, &v), c)));
        let (lazy, c) = lazy?;
        let (sorted, t_sorted) = timed(|| solve_sorted(&v, k).map(|(s, _)| score(&s, &v)));
        let sorted = sorted?;
        row.mean_intersections_computed += c.intersections_computed as f64;
        row.max_intersections_computed = row.max_intersections_computed.max(c.intersections_computed);
        row.mean_distinct_supports += c.distinct_supports as f64;
        row.mean_time_sorted_s += t_sorted;
        row.mean_time_lazy_s += t_lazy;
        if (lazy - sorted).abs() > 1e-9 * sorted.abs() {
            disagreements += 1;
        }
        if let Some(t) = row.mean_time_rankd_s.as_mut() {
            let (set, t_rankd) = timed(|| enumerate_candidates(&v, k).map(|s| score(&s, &v)));
            if (set? - sorted).abs() > 1e-9 * sorted.abs() {
                disagreements += 1;
            }
            *t += t_rankd;
        }
    }
    if disagreements > 0 {
        return Err(CliError::Dimension(format!(
            "algorithms disagree on {disagreements} trial(s) at n={n} rule={}",
            rule.as_str()
        )));
    }
    let trials = opts.trials.max(1) as f64;
    row.mean_intersections_computed /= trials;
    row.mean_distinct_supports /= trials;
    for t in [&mut row.mean_time_sorted_s, &mut row.mean_time_lazy_s]
        .into_iter()
        .chain(row.mean_time_rankd_s.as_mut())
    {
        *t = if opts.deterministic { 0.0 } else { *t / trials };
    }
    Ok(row)
}

pub fn run_bench(opts: &BenchOptions) -> Result<(Vec<BenchRow>, String), CliError> {
    let mut rows = Vec::new();
    for &n in &opts.n_list {
        for (i, &rule) in opts.k_rules.iter().enumerate() {
            rows.push(bench_row(opts, n, rule, i)?);
        }
    }
    let mut csv = String::new();
    let _ = writeln!(csv, "# lrspca bench");
    let _ = writeln!(
        csv,
        "# distribution=standard_normal d=2 trials={} seed={} timing={}",
        opts.trials,
        opts.seed,
        if opts.deterministic { "disabled" } else { "wall_clock" }
    );
    let _ = writeln!(
        csv,
        "# k rules: sqrt=round(sqrt(N)) 5logn=round(5*ln(N)) const20=20, clamped to [1,N]"
    );
    let _ = writeln!(csv, "# intersection counters and supports from the lazy sweep");
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.rule.as_str(),
            r.k,
            opts.trials,
            r.total_intersections,
            r.mean_intersections_computed,
            r.max_intersections_computed,
            r.mean_distinct_supports,
            r.mean_time_rankd_s.map_or_else(|| "NA".to_string(), |t| t.to_string()),
            r.mean_time_sorted_s,
            r.mean_time_lazy_s
        );
    }
    Ok((rows, csv))
}
