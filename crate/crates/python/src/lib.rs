//! Python bindings. Matrices are passed as sequences of rows.

use lowrank_spca as core;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use core::{Algorithm, FactorMatrix, ProblemInstance, Tolerances};

create_exception!(
    lowrank_spca_py,
    SolverError,
    PyException,
    "Invalid input or solver refusal."
);

fn to_py(e: core::Error) -> PyErr {
    SolverError::new_err(format!("{}: {e}", e.kind()))
}

fn factors(rows: Vec<Vec<f64>>) -> PyResult<FactorMatrix> {
    FactorMatrix::from_rows(&rows).map_err(to_py)
}

fn algorithm(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(to_py)
}

/// Counters of a rank-2 sweep.
#[pyclass(frozen, get_all, skip_from_py_object, module = "lowrank_spca_py")]
#[derive(Clone)]
struct SweepCounters {
    intersections_computed: u64,
    intersections_visited: u64,
    distinct_supports: u64,
    fallbacks: u64,
}

impl From<core::SweepCounters> for SweepCounters {
    fn from(c: core::SweepCounters) -> Self {
        SweepCounters {
            intersections_computed: c.intersections_computed,
            intersections_visited: c.intersections_visited,
            distinct_supports: c.distinct_supports,
            fallbacks: c.fallbacks,
        }
    }
}

#[pymethods]
impl SweepCounters {
    fn __repr__(&self) -> String {
        format!(
            "SweepCounters(intersections_computed={}, intersections_visited={}, distinct_supports={}, fallbacks={})",
            self.intersections_computed, self.intersections_visited, self.distinct_supports, self.fallbacks
        )
    }
}

/// Unit-norm K-sparse component.
#[pyclass(frozen, get_all, module = "lowrank_spca_py")]
struct SparseComponent {
    vector: Vec<f64>,
    support: Vec<usize>,
    objective_singular: f64,
    objective_quadratic: f64,
    sparsity: usize,
    path: String,
    candidates: usize,
    counters: Option<SweepCounters>,
}

#[pymethods]
impl SparseComponent {
    fn __repr__(&self) -> String {
        format!(
            "SparseComponent(support={:?}, objective_quadratic={}, path='{}')",
            self.support, self.objective_quadratic, self.path
        )
    }
}

impl From<core::SolveReport> for SparseComponent {
    fn from(r: core::SolveReport) -> Self {
        SparseComponent {
            support: r.solution.support.indices().to_vec(),
            vector: r.solution.vector,
            objective_singular: r.solution.objective_singular,
            objective_quadratic: r.solution.objective_quadratic,
            sparsity: r.solution.sparsity,
            path: r.path.as_str().to_string(),
            candidates: r.candidates,
            counters: r.counters.map(SweepCounters::from),
        }
    }
}

/// Sparse component of `sigma I + V V^T` from the factor rows of `V`.
#[pyfunction]
#[pyo3(signature = (factors, k, sigma = 0.0, algorithm = "auto"))]
fn solve(py: Python<'_>, factors: Vec<Vec<f64>>, k: usize, sigma: f64, algorithm: &str) -> PyResult<SparseComponent> {
    let v = self::factors(factors)?;
    let alg = self::algorithm(algorithm)?;
    py.detach(|| core::solve_factors(v, k, sigma, alg, Tolerances::default()))
        .map(SparseComponent::from)
        .map_err(to_py)
}

/// Factors `matrix - sigma I` at the given rank, then solves.
#[pyfunction]
#[pyo3(signature = (matrix, k, rank, sigma = 0.0, algorithm = "auto"))]
fn solve_covariance(
    py: Python<'_>,
    matrix: Vec<Vec<f64>>,
    k: usize,
    rank: usize,
    sigma: f64,
    algorithm: &str,
) -> PyResult<SparseComponent> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(to_py(core::Error::DimensionMismatch("matrix must be square".into())));
    }
    let flat: Vec<f64> = matrix.into_iter().flatten().collect();
    let alg = self::algorithm(algorithm)?;
    py.detach(|| {
        let tol = Tolerances::default();
        let v = core::factorize_psd(&flat, n, rank, sigma, tol.rank)?;
        core::solve_factors(v, k, sigma, alg, tol)
    })
    .map(SparseComponent::from)
    .map_err(to_py)
}

/// Exhaustive search: `(support, sigma_max)` of the best `k` rows.
#[pyfunction]
#[pyo3(signature = (factors, k, cap = 2_000_000))]
fn brute_force(py: Python<'_>, factors: Vec<Vec<f64>>, k: usize, cap: u128) -> PyResult<(Vec<usize>, f64)> {
    let v = self::factors(factors)?;
    let best = py.detach(|| core::brute_force_factors(&v, k, cap)).map_err(to_py)?;
    Ok((best.support.into_vec(), best.value))
}

/// Candidate supports from the vertex enumeration, sorted.
#[pyfunction]
fn enumerate_candidates(py: Python<'_>, factors: Vec<Vec<f64>>, k: usize) -> PyResult<Vec<Vec<usize>>> {
    let v = self::factors(factors)?;
    let set = py.detach(|| core::enumerate_candidates(&v, k)).map_err(to_py)?;
    Ok(set.iter().map(|s| s.indices().to_vec()).collect())
}

type SweepResult = (Vec<Vec<usize>>, SweepCounters);

fn sweep(
    py: Python<'_>,
    factors: Vec<Vec<f64>>,
    k: usize,
    run: fn(&FactorMatrix, usize) -> core::Result<(core::CandidateSet, core::SweepCounters)>,
) -> PyResult<SweepResult> {
    let v = self::factors(factors)?;
    let (set, counters) = py.detach(|| run(&v, k)).map_err(to_py)?;
    Ok((set.iter().map(|s| s.indices().to_vec()).collect(), counters.into()))
}

/// Sorted sweep over every crossing (rank 2 only).
#[pyfunction]
fn solve_sorted(py: Python<'_>, factors: Vec<Vec<f64>>, k: usize) -> PyResult<SweepResult> {
    sweep(py, factors, k, core::solve_sorted)
}

/// Sweep that follows only the K-th curve (rank 2 only).
#[pyfunction]
fn solve_lazy(py: Python<'_>, factors: Vec<Vec<f64>>, k: usize) -> PyResult<SweepResult> {
    sweep(py, factors, k, core::solve_lazy)
}

/// `(strict, tied, threshold)` for the `k` largest magnitudes.
#[pyfunction]
#[pyo3(signature = (u, k, tau_tie = 1e-9))]
fn top_k_indices(u: Vec<f64>, k: usize, tau_tie: f64) -> PyResult<(Vec<usize>, Vec<usize>, f64)> {
    let top = core::top_k_indices(&u, k, tau_tie).map_err(to_py)?;
    Ok((top.strict, top.tied, top.threshold))
}

/// Largest singular value of the selected rows.
#[pyfunction]
fn support_singular_value(factors: Vec<Vec<f64>>, support: Vec<usize>) -> PyResult<f64> {
    let v = self::factors(factors)?;
    let support = core::Support::new(support).map_err(to_py)?;
    if support.iter().any(|i| i >= v.rows()) {
        return Err(to_py(core::Error::DimensionMismatch(
            "support index out of range".into(),
        )));
    }
    Ok(core::support_singular_value(&v, support.indices()))
}

/// `(rows, sparsity, rank)` of the preprocessed problem.
#[pyfunction]
fn preprocessed_shape(factors: Vec<Vec<f64>>, k: usize) -> PyResult<(usize, usize, usize)> {
    let inst = ProblemInstance::new(self::factors(factors)?, k, 0.0).map_err(to_py)?;
    Ok((inst.factors().rows(), inst.sparsity(), inst.rank()))
}

#[pymodule]
fn lowrank_spca_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_class::<SparseComponent>()?;
    m.add_class::<SweepCounters>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_candidates, m)?)?;
    m.add_function(wrap_pyfunction!(solve_sorted, m)?)?;
    m.add_function(wrap_pyfunction!(solve_lazy, m)?)?;
    m.add_function(wrap_pyfunction!(top_k_indices, m)?)?;
    m.add_function(wrap_pyfunction!(support_singular_value, m)?)?;
    m.add_function(wrap_pyfunction!(preprocessed_shape, m)?)?;
    Ok(())
}
