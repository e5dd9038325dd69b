//! Exhaustive search over all `C(N, K)` supports.

use rayon::prelude::*;

use crate::combinatorics::{binomial, next_combination, split_ranges, unrank_combination, Combinations};
use crate::error::{Error, Result};
use crate::linalg::support_singular_value;
use crate::model::{Candidate, FactorMatrix, ProblemInstance, Support};

/// Default ceiling on `C(N, K)`.
pub const DEFAULT_CAP: u128 = 2_000_000;

/// All `k`-subsets of `0..n`, lexicographically.
pub fn enumerate_supports(n: usize, k: usize) -> Result<impl Iterator<Item = Support>> {
    if k == 0 || k > n {
        return Err(Error::InvalidSparsity { k, n });
    }
    Ok(Combinations::new(n, k).map(Support::from_sorted))
}

/// Best support of the preprocessed instance, in its reduced indexing.
pub fn brute_force(instance: &ProblemInstance) -> Result<Candidate> {
    brute_force_factors(instance.factors(), instance.sparsity(), DEFAULT_CAP)
}

/// Maximizes `sigma_max(V_I)` over every `|I| = k`; ties go to the
/// lexicographically smallest support. Refuses when `C(N, k) > cap`.
pub fn brute_force_factors(v: &FactorMatrix, k: usize, cap: u128) -> Result<Candidate> {
    let n = v.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidSparsity { k, n });
    }
    let count = binomial(n, k);
    if count > cap {
        return Err(Error::OracleCapExceeded { n, k, count, cap });
    }
    split_ranges(count, rayon::current_num_threads() * 8)
        .into_par_iter()
        .map(|(start, end)| {
            let mut comb = vec![0; k];
            unrank_combination(start, n, &mut comb);
            let mut best = (support_singular_value(v, &comb), comb.clone());
            for _ in start + 1..end {
                next_combination(&mut comb, n);
                let value = support_singular_value(v, &comb);
                if value > best.0 {
                    best = (value, comb.clone());
                }
            }
            Candidate {
                support: Support::from_sorted(best.1),
                value: best.0,
            }
        })
        .reduce_with(Candidate::better)
        .ok_or(Error::InvalidSparsity { k, n })
}
