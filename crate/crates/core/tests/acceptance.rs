//! Acceptance checks with one verdict line per criterion.

mod common;

use std::time::{Duration, Instant};

use common::{degenerate_factors, integer_factors, normal_factors, rel_close, rng};
use lowrank_spca::combinatorics::binomial;
use lowrank_spca::rankd::candidates_for_vertex;
use lowrank_spca::{
    brute_force, brute_force_factors, cardinality_bound, enumerate_candidates, solve_detailed, solve_factors,
    solve_lazy, solve_sorted, Algorithm, Error, FactorMatrix, ProblemInstance, SignPattern, SolvePath,
    SparsePrincipalComponent, Tolerances,
};

struct Verdict {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn verdict(name: &'static str, failures: &[String], detail: String) -> Verdict {
    let ok = failures.is_empty();
    let detail = if ok {
        detail
    } else {
        format!("{detail}; {} failure(s), first: {}", failures.len(), failures[0])
    };
    Verdict { name, ok, detail }
}

fn algorithms_for(d: usize) -> &'static [Algorithm] {
    match d {
        2 => &Algorithm::ALL,
        _ => &[Algorithm::Auto, Algorithm::RankD],
    }
}

/// `x^T (sigma I + V V^T) x` on the raw factors.
fn quadratic_form(v: &FactorMatrix, sigma: f64, x: &[f64]) -> f64 {
    let y = v.transpose_mul_vec(x);
    sigma * x.iter().map(|a| a * a).sum::<f64>() + y.iter().map(|a| a * a).sum::<f64>()
}

fn contract_violation(v: &FactorMatrix, k: usize, sigma: f64, pc: &SparsePrincipalComponent) -> Option<String> {
    let norm = pc.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Some(format!("norm {norm}"));
    }
    if pc.nnz() > k || pc.support.len() > k {
        return Some(format!("nnz {} > k {k}", pc.nnz()));
    }
    let identity = sigma + pc.objective_singular * pc.objective_singular;
    if !rel_close(pc.objective_quadratic, identity, 1e-9) {
        return Some(format!(
            "objective {} vs sigma + s^2 {identity}",
            pc.objective_quadratic
        ));
    }
    let direct = quadratic_form(v, sigma, &pc.vector);
    if !rel_close(pc.objective_quadratic, direct, 1e-8) {
        return Some(format!("objective {} vs x^T C x {direct}", pc.objective_quadratic));
    }
    None
}

#[derive(Default)]
struct Contract {
    runs: usize,
    failures: Vec<String>,
}

impl Contract {
    fn check(&mut self, label: &str, v: &FactorMatrix, k: usize, sigma: f64, pc: &SparsePrincipalComponent) {
        self.runs += 1;
        if let Some(e) = contract_violation(v, k, sigma, pc) {
            self.failures.push(format!("{label}: {e}"));
        }
    }
}

fn oracle_equivalence(contract: &mut Contract, bound: &mut Vec<String>, bound_checks: &mut usize) -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut instances = 0;
    let mut paths = std::collections::BTreeSet::new();
    let mut r = rng(0xACCE_0001);
    for n in 4..=12 {
        for d in 1..=3 {
            for trial in 0..4 {
                let v = match trial {
                    0 | 1 => normal_factors(&mut r, n, d),
                    2 => integer_factors(&mut r, n, d, 2),
                    _ => degenerate_factors(&mut r, n, d),
                };
                let sigma = 0.25 * trial as f64;
                for k in 1..=n {
                    let label = format!("n={n} d={d} trial={trial} k={k}");
                    let inst = match ProblemInstance::new(v.clone(), k, sigma) {
                        Ok(i) => i,
                        Err(Error::ZeroMatrix) => continue,
                        Err(e) => {
                            failures.push(format!("{label}: {e}"));
                            continue;
                        }
                    };
                    instances += 1;
                    let oracle = brute_force(&inst).unwrap().value;
                    for &alg in algorithms_for(inst.rank()) {
                        match solve_detailed(&inst, alg) {
                            Ok(rep) => {
                                paths.insert(rep.path.as_str());
                                if !rel_close(rep.solution.objective_singular, oracle, 1e-9) {
                                    failures.push(format!(
                                        "{label} {alg}: {} vs {oracle}",
                                        rep.solution.objective_singular
                                    ));
                                }
                                contract.check(&label, &v, k, sigma, &rep.solution);
                            }
                            Err(e) => failures.push(format!("{label} {alg}: {e}")),
                        }
                    }
                    let (vr, kr) = (inst.factors(), inst.sparsity());
                    if vr.cols() >= 2 {
                        *bound_checks += 1;
                        let size = enumerate_candidates(vr, kr).unwrap().len() as u128;
                        if size > cardinality_bound(vr.rows(), vr.cols()) {
                            bound.push(format!("{label}: |S|={size}"));
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if instances < 500 {
        failures.push(format!("only {instances} instances"));
    }
    if elapsed > Duration::from_secs(120) {
        failures.push(format!("took {elapsed:?}"));
    }
    let paths: Vec<_> = paths.into_iter().collect();
    verdict(
        "oracle equivalence",
        &failures,
        format!(
            "{instances} instances, paths [{}], rel tol 1e-9, {:.1}s",
            paths.join(" "),
            elapsed.as_secs_f64()
        ),
    )
}

fn candidate_bound(mut failures: Vec<String>, mut checks: usize) -> Verdict {
    let mut r = rng(0xACCE_0002);
    let mut tight = 0u128;
    for d in 2..=3 {
        for n in d..=14 {
            for trial in 0..3 {
                let v = if trial == 0 {
                    integer_factors(&mut r, n, d, 1)
                } else {
                    normal_factors(&mut r, n, d)
                };
                for k in 1..=n {
                    checks += 1;
                    let size = enumerate_candidates(&v, k).unwrap().len() as u128;
                    let limit = cardinality_bound(n, d);
                    if d == 2 && limit != 4 * binomial(n, 2) {
                        failures.push(format!("bound formula n={n}: {limit}"));
                    }
                    if size > limit {
                        failures.push(format!("n={n} d={d} k={k}: |S|={size} > {limit}"));
                    }
                    tight = tight.max(size * 1000 / limit);
                }
            }
        }
    }
    for n in [30, 60] {
        let v = normal_factors(&mut r, n, 2);
        for k in [1, 5, n / 2] {
            checks += 1;
            for set in [
                enumerate_candidates(&v, k).unwrap(),
                solve_sorted(&v, k).unwrap().0,
                solve_lazy(&v, k).unwrap().0,
            ] {
                if set.len() as u128 > 4 * binomial(n, 2) {
                    failures.push(format!("rank2 n={n} k={k}: |S|={}", set.len()));
                }
            }
        }
    }
    verdict(
        "candidate-set bound",
        &failures,
        format!("{checks} instances, max |S|/bound = {:.3}", tight as f64 / 1000.0),
    )
}

fn cross_algorithm(contract: &mut Contract) -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut r = rng(0xACCE_0003);
    for n in [50usize, 100, 200] {
        let sqrt_k = (n as f64).sqrt().round() as usize;
        for k in [sqrt_k, 20] {
            for trial in 0..20 {
                let v = normal_factors(&mut r, n, 2);
                let inst = ProblemInstance::new(v.clone(), k, 1.0).unwrap();
                let values: Vec<f64> = [Algorithm::RankD, Algorithm::Rank2Sorted, Algorithm::Rank2Lazy]
                    .iter()
                    .map(|&a| {
                        let pc = solve_detailed(&inst, a).unwrap().solution;
                        contract.check(&format!("scale n={n} k={k} {a}"), &v, k, 1.0, &pc);
                        pc.objective_singular
                    })
                    .collect();
                runs += 1;
                if !values.iter().all(|x| rel_close(*x, values[0], 1e-9)) {
                    failures.push(format!("n={n} k={k} trial={trial}: {values:?}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(300) {
        failures.push(format!("took {elapsed:?}"));
    }
    verdict(
        "cross-algorithm agreement",
        &failures,
        format!(
            "{runs} instances (N 50/100/200, K sqrt(N) and 20), {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn lazy_statistics() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    let mut r = rng(0xACCE_0004);
    for n in [50usize, 100, 200, 400] {
        let total = 2.0 * binomial(n, 2) as f64;
        let (mut computed, mut distinct) = (0.0, 0.0);
        for _ in 0..100 {
            let v = normal_factors(&mut r, n, 2);
            let (_, c) = solve_lazy(&v, 20).unwrap();
            computed += c.intersections_computed as f64;
            distinct += c.distinct_supports as f64;
        }
        computed /= 100.0;
        distinct /= 100.0;
        if computed >= total {
            failures.push(format!("n={n}: computed {computed} >= {total}"));
        }
        if distinct >= computed {
            failures.push(format!("n={n}: distinct {distinct} >= computed {computed}"));
        }
        rows.push((n, total, computed, distinct));
    }
    for w in rows.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.1 - b.2 <= a.1 - a.2 {
            failures.push(format!("total-computed gap shrinks {} -> {}", a.0, b.0));
        }
        if b.2 - b.3 <= a.2 - a.3 {
            failures.push(format!("computed-distinct gap shrinks {} -> {}", a.0, b.0));
        }
    }
    let summary: Vec<String> = rows
        .iter()
        .map(|(n, t, c, d)| format!("N={n}: {c:.0}/{t:.0} computed, {d:.1} supports"))
        .collect();
    verdict(
        "lazy sweep counters (K=20, normal entries)",
        &failures,
        format!("{}; {:.1}s", summary.join("; "), start.elapsed().as_secs_f64()),
    )
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn complexity() -> Verdict {
    let mut failures = Vec::new();
    let mut r = rng(0xACCE_0005);
    let sorted = median(
        (0..3)
            .map(|_| {
                let v = normal_factors(&mut r, 2000, 2);
                let t = Instant::now();
                let (set, _) = solve_sorted(&v, 100).unwrap();
                set.best(&v).unwrap();
                t.elapsed().as_secs_f64()
            })
            .collect(),
    );
    if sorted >= 60.0 {
        failures.push(format!("sorted sweep median {sorted:.2}s"));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let sizes = [100usize, 200, 400];
    let instances: Vec<Vec<_>> = sizes
        .iter()
        .map(|&n| (0..3).map(|_| normal_factors(&mut r, n, 2)).collect())
        .collect();
    // Seconds for one pass over an instance set; small N is repeated and averaged.
    let time = |set: &[FactorMatrix]| {
        let reps = (200 / set[0].rows()).pow(3).max(1);
        pool.install(|| {
            let t = Instant::now();
            for _ in 0..reps {
                for v in set {
                    enumerate_candidates(v, 10).unwrap().best(v).unwrap();
                }
            }
            t.elapsed().as_secs_f64() / reps as f64
        })
    };
    time(&instances[0]);
    // Interleaved rounds; interference only adds time, so the fastest round is kept.
    let mut times = vec![f64::INFINITY; sizes.len()];
    for _ in 0..5 {
        for (best, set) in times.iter_mut().zip(&instances) {
            *best = best.min(time(set));
        }
    }
    let ratios = [times[1] / times[0], times[2] / times[1]];
    for (i, q) in ratios.iter().enumerate() {
        if !(6.0..=10.0).contains(q) {
            failures.push(format!("ratio {} = {q:.2}", ["200/100", "400/200"][i]));
        }
    }
    verdict(
        "complexity",
        &failures,
        format!(
            "sorted sweep N=2000 K=100 median {sorted:.2}s; vertex enumeration (1 thread, K=10, 3 instances, best of 5) {:.3}/{:.3}/{:.3}s, ratios {:.2} {:.2}",
            times[0], times[1], times[2], ratios[0], ratios[1]
        ),
    )
}

fn degenerate_inputs(contract: &mut Contract) -> Verdict {
    let mut failures: Vec<String> = Vec::new();
    let mut cases = 0;
    let mut fail = |cond: bool, msg: String| {
        cases += 1;
        if !cond {
            failures.push(msg);
        }
    };
    let tol = Tolerances::default();

    // Zero rows are dropped and never selected.
    let v = FactorMatrix::from_rows(&[[1.0, 2.0], [0.0, 0.0], [-2.0, 0.5], [0.0, 0.0], [0.3, -1.0]]).unwrap();
    for k in 1..=5 {
        let inst = ProblemInstance::new(v.clone(), k, 0.0).unwrap();
        let oracle = brute_force_factors(&v, k, u128::MAX).unwrap().value;
        fail(
            inst.removed_rows() == [1, 3],
            format!("removed rows {:?}", inst.removed_rows()),
        );
        fail(
            inst.sparsity() == k.min(3),
            format!("k={k}: sparsity {}", inst.sparsity()),
        );
        for &alg in &Algorithm::ALL {
            let pc = solve_detailed(&inst, alg).unwrap().solution;
            contract.check("zero rows", &v, k, 0.0, &pc);
            fail(
                !pc.support.contains(1) && !pc.support.contains(3),
                format!("k={k} {alg}: picked a zero row"),
            );
            fail(
                rel_close(pc.objective_singular, oracle, 1e-12),
                format!("zero rows k={k} {alg}"),
            );
        }
    }

    // Duplicate rows up to sign.
    let v = FactorMatrix::from_rows(&[
        [1.0, 2.0],
        [-1.0, -2.0],
        [2.0, -1.0],
        [1.0, 2.0],
        [2.0, -1.0],
        [0.5, 0.5],
    ])
    .unwrap();
    for k in 1..=6 {
        let inst = ProblemInstance::new(v.clone(), k, 0.0).unwrap();
        let oracle = brute_force_factors(&v, k, u128::MAX).unwrap().value;
        for &alg in &Algorithm::ALL {
            let pc = solve_detailed(&inst, alg).unwrap().solution;
            contract.check("duplicates", &v, k, 0.0, &pc);
            fail(
                rel_close(pc.objective_singular, oracle, 1e-12),
                format!("duplicates k={k} {alg}"),
            );
        }
    }
    let (_, counters) = solve_sorted(&v, 2).unwrap();
    fail(
        counters.intersections_computed == 30 - 4,
        format!("coincident branches: {counters:?}"),
    );

    // K = 1: the row of largest norm.
    let mut r = rng(0xACCE_0006);
    for d in 1..=3 {
        let v = normal_factors(&mut r, 9, d);
        let best = (0..9)
            .map(|i| v.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let inst = ProblemInstance::new(v.clone(), 1, 0.0).unwrap();
        for &alg in algorithms_for(d) {
            let pc = solve_detailed(&inst, alg).unwrap().solution;
            contract.check("k=1", &v, 1, 0.0, &pc);
            fail(
                pc.nnz() == 1 && rel_close(pc.objective_singular, best, 1e-12),
                format!("k=1 d={d} {alg}"),
            );
        }
    }

    // K = N: unconstrained principal component.
    for d in 1..=3 {
        let v = normal_factors(&mut r, 7, d);
        let (s, _) = lowrank_spca::principal_singular_pair(&v);
        let inst = ProblemInstance::new(v.clone(), 7, 0.5).unwrap();
        for &alg in algorithms_for(d) {
            let rep = solve_detailed(&inst, alg).unwrap();
            contract.check("k=n", &v, 7, 0.5, &rep.solution);
            let expected = if d == 1 {
                SolvePath::Rank1
            } else {
                SolvePath::FullSupport
            };
            fail(rep.path == expected, format!("k=n d={d}: path {}", rep.path));
            fail(
                rel_close(rep.solution.objective_singular, s, 1e-12),
                format!("k=n d={d} {alg}"),
            );
        }
    }

    // All-zero factors.
    let zero = FactorMatrix::new(4, 2, vec![0.0; 8]).unwrap();
    fail(
        matches!(ProblemInstance::new(zero.clone(), 2, 1.0), Err(Error::ZeroMatrix)),
        "zero matrix not reported".into(),
    );
    for &alg in &Algorithm::ALL {
        let rep = solve_factors(zero.clone(), 2, 1.0, alg, tol).unwrap();
        contract.check("zero matrix", &zero, 2, 1.0, &rep.solution);
        fail(
            rep.path == SolvePath::ZeroMatrix && rep.solution.objective_quadratic == 1.0,
            format!("zero matrix {alg}: {}", rep.path),
        );
    }

    // Rank-deficient vertex systems are skipped, the enumeration stays exact.
    let v = FactorMatrix::from_rows(&[
        [1.0, 0.0, 2.0],
        [1.0, 0.0, 2.0],
        [-1.0, 0.0, -2.0],
        [0.0, 1.0, 1.0],
        [2.0, 1.0, 0.0],
        [0.0, 1.0, 1.0],
        [1.0, 1.0, 1.0],
    ])
    .unwrap();
    for (rows, pattern) in [([0, 1, 3], 0), ([0, 2, 4], 1), ([3, 5, 6], 0)] {
        let p = SignPattern::from_index(pattern, 2);
        let out = candidates_for_vertex(&v, &rows, &p, 2, &tol).unwrap();
        fail(out.is_empty(), format!("vertex {rows:?} pattern {pattern}: {out:?}"));
    }
    for k in 1..=7 {
        let inst = ProblemInstance::new(v.clone(), k, 0.0).unwrap();
        let pc = solve_detailed(&inst, Algorithm::RankD).unwrap().solution;
        contract.check("deficient vertices", &v, k, 0.0, &pc);
        let oracle = brute_force_factors(&v, k, u128::MAX).unwrap().value;
        fail(
            rel_close(pc.objective_singular, oracle, 1e-12),
            format!("deficient k={k}"),
        );
    }

    // Fewer retained rows than the rank, and dependent columns.
    let v = FactorMatrix::from_rows(&[[1.0, 2.0, 0.5], [0.0, 0.0, 0.0], [-3.0, 1.0, 2.0]]).unwrap();
    let inst = ProblemInstance::new(v.clone(), 2, 0.0).unwrap();
    let pc = solve_detailed(&inst, Algorithm::Auto).unwrap().solution;
    contract.check("short", &v, 2, 0.0, &pc);
    fail(
        inst.rank() <= 2 && pc.support.indices() == [0, 2],
        format!("short: rank {} {}", inst.rank(), pc.support),
    );
    let v = FactorMatrix::from_rows(&[[1.0, 2.0], [0.5, 1.0], [-3.0, -6.0], [2.0, 4.0]]).unwrap();
    let inst = ProblemInstance::new(v.clone(), 2, 0.0).unwrap();
    let rep = solve_detailed(&inst, Algorithm::Rank2Lazy).unwrap();
    contract.check("dependent", &v, 2, 0.0, &rep.solution);
    fail(
        rep.path == SolvePath::Rank1 && rep.solution.support.indices() == [2, 3],
        format!("dependent: {} {}", rep.path, rep.solution.support),
    );

    // Invalid sparsity is an error, never a panic.
    let v = normal_factors(&mut r, 4, 2);
    fail(
        matches!(
            ProblemInstance::new(v.clone(), 0, 0.0),
            Err(Error::InvalidSparsity { .. })
        ),
        "k=0".into(),
    );
    fail(
        matches!(ProblemInstance::new(v, 5, 0.0), Err(Error::InvalidSparsity { .. })),
        "k>n".into(),
    );

    verdict("degenerate inputs", &failures, format!("{cases} checks"))
}

fn main() {
    // Honour `cargo test -- <filter>` and `--list` from the workspace runner.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if args
        .iter()
        .any(|a| !a.starts_with('-') && !"acceptance".contains(a.as_str()))
    {
        return;
    }

    let mut contract = Contract::default();
    let mut bound = Vec::new();
    let mut bound_checks = 0;
    let mut verdicts = vec![oracle_equivalence(&mut contract, &mut bound, &mut bound_checks)];
    verdicts.push(candidate_bound(bound, bound_checks));
    verdicts.push(cross_algorithm(&mut contract));
    verdicts.push(lazy_statistics());
    verdicts.push(complexity());
    verdicts.push(degenerate_inputs(&mut contract));
    let runs = contract.runs;
    verdicts.push(verdict(
        "solution contract",
        &contract.failures,
        format!("{runs} solves"),
    ));

    let mut failed = 0;
    for v in &verdicts {
        println!("[{}] {}: {}", if v.ok { "PASS" } else { "FAIL" }, v.name, v.detail);
        failed += usize::from(!v.ok);
    }
    println!(
        "acceptance: {}/{} criteria passed",
        verdicts.len() - failed,
        verdicts.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
