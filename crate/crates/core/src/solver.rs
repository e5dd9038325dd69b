//! End-to-end solve: candidate generation, exact scoring, embedding.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Candidate, FactorMatrix, ProblemInstance, SparsePrincipalComponent, Support, Tolerances};
use crate::rank2::{self, SweepCounters};
use crate::rankd::{self, CandidateSet, SignPattern};

/// Requested candidate generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Algorithm {
    /// Sorted sweep for rank 2, vertex enumeration otherwise.
    #[default]
    Auto,
    RankD,
    Rank2Sorted,
    Rank2Lazy,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Auto,
        Algorithm::RankD,
        Algorithm::Rank2Sorted,
        Algorithm::Rank2Lazy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Auto => "auto",
            Algorithm::RankD => "rankd",
            Algorithm::Rank2Sorted => "rank2_sorted",
            Algorithm::Rank2Lazy => "rank2_lazy",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm '{s}'")))
    }
}

/// Generator that actually ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolvePath {
    Rank1,
    FullSupport,
    RankD,
    Rank2Sorted,
    Rank2Lazy,
    /// Every retained row was zero.
    ZeroMatrix,
}

impl SolvePath {
    pub fn as_str(self) -> &'static str {
        match self {
            SolvePath::Rank1 => "rank1",
            SolvePath::FullSupport => "full_support",
            SolvePath::RankD => "rankd",
            SolvePath::Rank2Sorted => "rank2_sorted",
            SolvePath::Rank2Lazy => "rank2_lazy",
            SolvePath::ZeroMatrix => "zero_matrix",
        }
    }
}

impl fmt::Display for SolvePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solution together with how it was found.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: SparsePrincipalComponent,
    pub path: SolvePath,
    pub candidates: usize,
    /// Present for the rank-2 sweeps.
    pub counters: Option<SweepCounters>,
}

/// Candidate supports of a preprocessed instance (reduced indexing).
pub fn candidate_supports(
    instance: &ProblemInstance,
    algorithm: Algorithm,
) -> Result<(CandidateSet, SolvePath, Option<SweepCounters>)> {
    let v = instance.factors();
    let k = instance.sparsity();
    let tol = instance.tolerances();
    let d = v.cols();
    if matches!(algorithm, Algorithm::Rank2Sorted | Algorithm::Rank2Lazy) && d > 2 {
        return Err(Error::AlgorithmMismatch {
            algorithm: algorithm.as_str(),
            rank: d,
        });
    }
    if d == 1 {
        let column: Vec<f64> = (0..v.rows()).map(|n| v.get(n, 0)).collect();
        let best = rankd::rank1_solve(&column, k)?;
        return Ok((CandidateSet::from_supports([best.support]), SolvePath::Rank1, None));
    }
    if k == v.rows() {
        return Ok((
            CandidateSet::from_supports([Support::leading(k)]),
            SolvePath::FullSupport,
            None,
        ));
    }
    match (algorithm, d) {
        (Algorithm::Rank2Sorted, _) | (Algorithm::Auto, 2) => {
            let (set, counters) = rank2::solve_sorted_with(v, k, tol)?;
            Ok((set, SolvePath::Rank2Sorted, Some(counters)))
        }
        (Algorithm::Rank2Lazy, _) => {
            let (set, counters) = rank2::solve_lazy_with(v, k, tol)?;
            Ok((set, SolvePath::Rank2Lazy, Some(counters)))
        }
        _ => {
            let set = rankd::enumerate_candidates_with(v, k, tol, &SignPattern::all(d))?;
            Ok((set, SolvePath::RankD, None))
        }
    }
}

/// Solves the instance and reports the path taken.
pub fn solve_detailed(instance: &ProblemInstance, algorithm: Algorithm) -> Result<SolveReport> {
    let (set, path, counters) = candidate_supports(instance, algorithm)?;
    let best: Candidate = set
        .best(instance.factors())
        .ok_or_else(|| Error::InvalidInput("empty candidate set".into()))?;
    Ok(SolveReport {
        solution: instance.build_solution(&best)?,
        path,
        candidates: set.len(),
        counters,
    })
}

pub fn solve(instance: &ProblemInstance, algorithm: Algorithm) -> Result<SparsePrincipalComponent> {
    solve_detailed(instance, algorithm).map(|r| r.solution)
}

/// Builds the instance from raw factors and solves it, mapping an all-zero
/// factor matrix to its trivial solution.
pub fn solve_factors(
    factors: FactorMatrix,
    k: usize,
    sigma: f64,
    algorithm: Algorithm,
    tolerances: Tolerances,
) -> Result<SolveReport> {
    let (n, d) = (factors.rows(), factors.cols());
    match ProblemInstance::with_tolerances(factors, k, sigma, tolerances) {
        Ok(instance) => solve_detailed(&instance, algorithm),
        Err(Error::ZeroMatrix) => {
            if matches!(algorithm, Algorithm::Rank2Sorted | Algorithm::Rank2Lazy) && d > 2 {
                return Err(Error::AlgorithmMismatch {
                    algorithm: algorithm.as_str(),
                    rank: d,
                });
            }
            Ok(SolveReport {
                solution: SparsePrincipalComponent::for_zero_matrix(n, k, sigma),
                path: SolvePath::ZeroMatrix,
                candidates: 1,
                counters: None,
            })
        }
        Err(e) => Err(e),
    }
}
