//! Problem data for `C = sigma * I + V V^T` and the preprocessing that turns raw
//! factors into a well-posed [`ProblemInstance`].

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg;

/// Numerical thresholds shared by every algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Rows whose largest entry is below `zero * max|V|` are eliminated.
    pub zero: f64,
    /// Relative threshold for rank decisions (PSD checks, null spaces).
    pub rank: f64,
    /// Relative threshold under which two magnitudes count as tied.
    pub tie: f64,
    /// Events closer than this many radians form a cluster.
    pub angle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero: 1e-12,
            rank: 1e-9,
            tie: 1e-9,
            angle: 1e-10,
        }
    }
}

/// Gram eigenvalues below this fraction of the largest one are treated as an
/// exactly rank-deficient direction and projected out.
const RANK_REDUCTION_TOL: f64 = 1e-13;

/// Dense `N x D` real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FactorMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "factor matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite entry {bad}")));
        }
        Ok(FactorMatrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (n, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {n} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        FactorMatrix::new(rows.len(), cols, data)
    }

    /// Rank-1 factor from a single column.
    pub fn column(values: &[f64]) -> Result<Self> {
        FactorMatrix::new(values.len(), 1, values.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.cols..(n + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, n: usize, d: usize) -> f64 {
        self.data[n * self.cols + d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn select_rows(&self, indices: &[usize]) -> FactorMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &n in indices {
            data.extend_from_slice(self.row(n));
        }
        FactorMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn scaled(&self, alpha: f64) -> FactorMatrix {
        FactorMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| alpha * x).collect(),
        }
    }

    /// `V c` for a length-`D` vector `c`.
    pub fn mul_vec(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(c, &mut out);
        out
    }

    pub(crate) fn mul_vec_into(&self, c: &[f64], out: &mut [f64]) {
        debug_assert_eq!(c.len(), self.cols);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = row.iter().zip(c).map(|(a, b)| a * b).sum();
        }
    }

    /// `V^T x` for a length-`N` vector `x`.
    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (xi, row) in x.iter().zip(self.data.chunks_exact(self.cols)) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += xi * v;
            }
        }
        out
    }

    /// `D x D` Gram matrix `V^T V`, row-major.
    pub fn gram(&self) -> Vec<f64> {
        let d = self.cols;
        let mut g = vec![0.0; d * d];
        for row in self.data.chunks_exact(d) {
            accumulate_outer(&mut g, row);
        }
        g
    }

    /// `N x N` matrix `V V^T`, row-major.
    pub fn outer(&self) -> Vec<f64> {
        let n = self.rows;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let dot: f64 = self.row(i).iter().zip(self.row(j)).map(|(x, y)| x * y).sum();
                a[i * n + j] = dot;
                a[j * n + i] = dot;
            }
        }
        a
    }
}

pub(crate) fn accumulate_outer(g: &mut [f64], row: &[f64]) {
    let d = row.len();
    for a in 0..d {
        for b in 0..d {
            g[a * d + b] += row[a] * row[b];
        }
    }
}

/// Sorted set of row indices allowed to be nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Support(Vec<usize>);

impl Support {
    /// Sorts `indices`; duplicates are rejected.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!(
                "support has duplicate indices: {indices:?}"
            )));
        }
        Ok(Support(indices))
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Support(indices)
    }

    pub(crate) fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        Support::from_sorted(indices)
    }

    /// `{0, 1, ..., k-1}`.
    pub fn leading(k: usize) -> Self {
        Support((0..k).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        Ok(())
    }
}

/// A support together with `sigma_max(V_{I,:})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub support: Support,
    pub value: f64,
}

impl Candidate {
    /// Scores `support` against `v`.
    pub fn evaluate(v: &FactorMatrix, support: Support) -> Self {
        let value = linalg::support_singular_value(v, support.indices());
        Candidate { support, value }
    }

    /// Larger value wins; equal values fall back to the lexicographically
    /// smaller support.
    pub fn beats(&self, other: &Candidate) -> bool {
        self.value > other.value || (self.value == other.value && self.support < other.support)
    }

    pub(crate) fn better(a: Candidate, b: Candidate) -> Candidate {
        if b.beats(&a) {
            b
        } else {
            a
        }
    }
}

/// The unit-norm, at most `K`-sparse principal component in the caller's
/// original row numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePrincipalComponent {
    pub vector: Vec<f64>,
    pub support: Support,
    /// `x^T C x`, equal to `sigma + objective_singular^2`.
    pub objective_quadratic: f64,
    /// `sigma_max(V_{I,:})` of the optimal support.
    pub objective_singular: f64,
    /// Sparsity actually used, `min(K, retained rows)`.
    pub sparsity: usize,
}

impl SparsePrincipalComponent {
    /// Solution reported when every factor row vanishes, so `C = sigma I` and any
    /// unit vector is optimal.
    pub fn for_zero_matrix(original_n: usize, k: usize, sigma: f64) -> Self {
        let k = k.clamp(1, original_n.max(1));
        let mut vector = vec![0.0; original_n];
        let w = 1.0 / (k as f64).sqrt();
        for x in vector.iter_mut().take(k) {
            *x = w;
        }
        SparsePrincipalComponent {
            vector,
            support: Support::leading(k),
            objective_quadratic: sigma,
            objective_singular: 0.0,
            sparsity: k,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vector.iter().filter(|x| **x != 0.0).count()
    }

    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// A preprocessed problem. Zero rows are removed and exactly dependent column
/// directions projected out; the sparsity is clamped to the retained rows.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    factors: FactorMatrix,
    sparsity: usize,
    requested_sparsity: usize,
    sigma: f64,
    removed_rows: Vec<usize>,
    original_n: usize,
    original_rank: usize,
    tolerances: Tolerances,
}

impl ProblemInstance {
    pub fn new(factors: FactorMatrix, k: usize, sigma: f64) -> Result<Self> {
        Self::with_tolerances(factors, k, sigma, Tolerances::default())
    }

    pub fn with_tolerances(factors: FactorMatrix, k: usize, sigma: f64, tolerances: Tolerances) -> Result<Self> {
        let original_n = factors.rows();
        let original_rank = factors.cols();
        if k == 0 || k > original_n {
            return Err(Error::InvalidSparsity { k, n: original_n });
        }
        if !sigma.is_finite() {
            return Err(Error::InvalidInput(format!("sigma must be finite, got {sigma}")));
        }
        let tau_zero = tolerances.zero * factors.max_abs();
        let (reduced, removed_rows) = preprocess(&factors, tau_zero)?;
        let reduced = reduce_rank(&reduced, RANK_REDUCTION_TOL).unwrap_or(reduced);
        let sparsity = k.min(reduced.rows());
        Ok(ProblemInstance {
            factors: reduced,
            sparsity,
            requested_sparsity: k,
            sigma,
            removed_rows,
            original_n,
            original_rank,
            tolerances,
        })
    }

    /// Working factor matrix after preprocessing.
    pub fn factors(&self) -> &FactorMatrix {
        &self.factors
    }

    /// Effective sparsity `K'`.
    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn requested_sparsity(&self) -> usize {
        self.requested_sparsity
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn removed_rows(&self) -> &[usize] {
        &self.removed_rows
    }

    pub fn original_n(&self) -> usize {
        self.original_n
    }

    /// Column count of the input factor matrix.
    pub fn original_rank(&self) -> usize {
        self.original_rank
    }

    /// Rank of the working factor matrix.
    pub fn rank(&self) -> usize {
        self.factors.cols()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    /// Turns the winning candidate (reduced indexing) into the final component.
    pub fn build_solution(&self, best: &Candidate) -> Result<SparsePrincipalComponent> {
        let sub = self.factors.select_rows(best.support.indices());
        let (_, left) = linalg::principal_singular_pair(&sub);
        let mut x_reduced = vec![0.0; self.factors.rows()];
        for (pos, n) in best.support.iter().enumerate() {
            x_reduced[n] = left[pos];
        }
        let (vector, support) = embed_solution(&x_reduced, &best.support, &self.removed_rows, self.original_n)?;
        Ok(SparsePrincipalComponent {
            vector,
            support,
            objective_quadratic: self.sigma + best.value * best.value,
            objective_singular: best.value,
            sparsity: self.sparsity,
        })
    }
}

/// Drops rows whose largest entry magnitude is `<= tau_zero`.
///
/// Returns the retained rows and the eliminated original indices in increasing
/// order, or [`Error::ZeroMatrix`] when nothing survives.
pub fn preprocess(factors: &FactorMatrix, tau_zero: f64) -> Result<(FactorMatrix, Vec<usize>)> {
    let mut kept = Vec::with_capacity(factors.rows());
    let mut removed = Vec::new();
    for n in 0..factors.rows() {
        let peak = factors.row(n).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if peak > tau_zero {
            kept.push(n);
        } else {
            removed.push(n);
        }
    }
    if kept.is_empty() {
        return Err(Error::ZeroMatrix);
    }
    if removed.is_empty() {
        return Ok((factors.clone(), removed));
    }
    Ok((factors.select_rows(&kept), removed))
}

/// Projects `V` onto the leading right singular directions when its columns are
/// (numerically exactly) dependent. Returns `None` when `V` already has full
/// column rank. `V V^T` is preserved up to the discarded eigenvalues.
pub fn reduce_rank(factors: &FactorMatrix, relative_tol: f64) -> Option<FactorMatrix> {
    let d = factors.cols();
    let eig = linalg::symmetric_eigendecomposition(&factors.gram(), d).ok()?;
    let top = eig.values[0].max(0.0);
    let rank = eig
        .values
        .iter()
        .take_while(|&&l| l > relative_tol * top)
        .count()
        .max(1);
    if rank == d {
        return None;
    }
    let mut data = Vec::with_capacity(factors.rows() * rank);
    for n in 0..factors.rows() {
        let row = factors.row(n);
        for r in 0..rank {
            data.push((0..d).map(|a| row[a] * eig.vector_entry(a, r)).sum());
        }
    }
    Some(FactorMatrix {
        rows: factors.rows(),
        cols: rank,
        data,
    })
}

/// Factors `matrix - sigma I = V V^T` keeping the `target_rank` leading
/// eigenpairs, `V = [sqrt(l_1) q_1 ... sqrt(l_D) q_D]`.
pub fn factorize_psd(matrix: &[f64], n: usize, target_rank: usize, sigma: f64, tau_rank: f64) -> Result<FactorMatrix> {
    if n == 0 || matrix.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "expected {n}x{n} matrix, got {} entries",
            matrix.len()
        )));
    }
    if target_rank == 0 {
        return Err(Error::InvalidInput("target rank must be at least 1".into()));
    }
    let mut shifted = matrix.to_vec();
    for i in 0..n {
        shifted[i * n + i] -= sigma;
    }
    let eig = linalg::symmetric_eigendecomposition(&shifted, n)?;
    let scale = eig.values.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let threshold = tau_rank * scale;
    if let Some(&low) = eig.values.last() {
        if low < -threshold {
            return Err(Error::NotPositiveSemidefinite {
                eigenvalue: low,
                threshold: -threshold,
            });
        }
    }
    if target_rank < n && eig.values[target_rank] > threshold {
        return Err(Error::RankExceeded {
            rank: target_rank,
            eigenvalue: eig.values[target_rank],
            threshold,
        });
    }
    let kept = target_rank.min(n);
    let mut data = vec![0.0; n * target_rank];
    for d in 0..kept {
        let w = eig.values[d].max(0.0).sqrt();
        for i in 0..n {
            data[i * target_rank + d] = w * eig.vector_entry(i, d);
        }
    }
    FactorMatrix::new(n, target_rank, data)
}

/// Re-inserts zeros at eliminated rows and maps the support back to original
/// numbering.
pub fn embed_solution(
    x_reduced: &[f64],
    support_reduced: &Support,
    removed_rows: &[usize],
    original_n: usize,
) -> Result<(Vec<f64>, Support)> {
    if x_reduced.len() + removed_rows.len() != original_n {
        return Err(Error::DimensionMismatch(format!(
            "{} retained + {} removed rows != {original_n}",
            x_reduced.len(),
            removed_rows.len()
        )));
    }
    let mut retained = Vec::with_capacity(x_reduced.len());
    let mut removed = removed_rows.iter().peekable();
    for n in 0..original_n {
        if removed.peek() == Some(&&n) {
            removed.next();
        } else {
            retained.push(n);
        }
    }
    if removed.next().is_some() || retained.len() != x_reduced.len() {
        return Err(Error::InvalidInput(format!(
            "removed rows {removed_rows:?} are not a sorted subset of 0..{original_n}"
        )));
    }
    let mut vector = vec![0.0; original_n];
    for (r, &n) in retained.iter().enumerate() {
        vector[n] = x_reduced[r];
    }
    let mut support = Vec::with_capacity(support_reduced.len());
    for r in support_reduced.iter() {
        let &n = retained
            .get(r)
            .ok_or_else(|| Error::InvalidInput(format!("support index {r} collides with removed rows")))?;
        support.push(n);
    }
    Ok((vector, Support::from_sorted(support)))
}
