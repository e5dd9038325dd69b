//! Exact K-sparse principal component of `sigma I + V V^T` for a tall factor
//! matrix `V` of small constant rank.
//!
//! Every support that can be optimal is the top-`K` set of `|V c|` for some
//! unit `c`, and only polynomially many such sets exist. [`rankd`] enumerates
//! them for any rank while [`rank2`] sweeps them serially when the rank is 2.
//! [`solver`] scores every candidate exactly; [`oracle`] is the exhaustive
//! reference.
//!
//! ```
//! use lowrank_spca::{solve, Algorithm, FactorMatrix, ProblemInstance};
//!
//! let v = FactorMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.8, 0.8]]).unwrap();
//! let pc = solve(&ProblemInstance::new(v, 2, 0.0).unwrap(), Algorithm::Auto).unwrap();
//! assert_eq!(pc.support.len(), 2);
//! assert!((pc.norm() - 1.0).abs() < 1e-12);
//! ```

pub mod combinatorics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod rank2;
pub mod rankd;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{principal_singular_pair, support_singular_value, top_k_indices, TopKResult};
pub use model::{
    embed_solution, factorize_psd, preprocess, Candidate, FactorMatrix, ProblemInstance, SparsePrincipalComponent,
    Support, Tolerances,
};
pub use oracle::{brute_force, brute_force_factors, enumerate_supports};
pub use rank2::{solve_lazy, solve_sorted, SweepCounters};
pub use rankd::{cardinality_bound, enumerate_candidates, CandidateSet, SignPattern};
pub use solver::{solve, solve_detailed, solve_factors, Algorithm, SolvePath, SolveReport};
