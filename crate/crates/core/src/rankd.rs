//! Candidate-support enumeration for rank-`D` factors.
//!
//! Every `D`-subset of rows and every sign pattern defines a vertex where `D`
//! magnitude hypersurfaces `|V_n c|` meet. The vertex direction `c` is the null
//! vector of the sign-patterned difference system; the top-`K` rows of `|V c|`,
//! with the tie among the meeting rows expanded, are the supports of the cells
//! around that vertex. The union over all vertices contains the optimum.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::combinatorics::{binomial, next_combination, split_ranges, unrank_combination, Combinations};
use crate::error::{Error, Result};
use crate::linalg::{self, TopKResult, TopKScratch};
use crate::model::{Candidate, FactorMatrix, Support, Tolerances};

/// Above this many tie completions only the smallest-index one is kept.
const TIE_EXPANSION_CAP: u128 = 64;

/// Signs `(b_1, ..., b_{D-1})` of the vertex system rows `V_{i_1} - b_t V_{i_{t+1}}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignPattern {
    bits: Vec<i8>,
}

impl SignPattern {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if bits.iter().any(|b| *b != 1 && *b != -1) {
            return Err(Error::InvalidInput(format!(
                "sign pattern entries must be +-1: {bits:?}"
            )));
        }
        Ok(SignPattern { bits })
    }

    /// Pattern number `index`: bit `t` set means `b_t = -1`.
    pub fn from_index(index: usize, len: usize) -> Self {
        let bits = (0..len).map(|t| if index >> t & 1 == 1 { -1 } else { 1 }).collect();
        SignPattern { bits }
    }

    /// All `2^(rank-1)` patterns, starting with all `+1`.
    pub fn all(rank: usize) -> Vec<SignPattern> {
        let len = rank.saturating_sub(1);
        (0..1usize << len).map(|i| SignPattern::from_index(i, len)).collect()
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }
}

/// Hyperspherical angles of a unit vector on the half-sphere with non-negative
/// last coordinate:
/// `c = (sin p1, cos p1 sin p2, ..., cos p1 ... sin p_{D-1}, cos p1 ... cos p_{D-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleVector {
    phi: Vec<f64>,
}

impl AngleVector {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        use std::f64::consts::FRAC_PI_2;
        if phi.iter().any(|p| !(*p > -FRAC_PI_2 && *p <= FRAC_PI_2)) {
            return Err(Error::InvalidInput(format!(
                "angles must lie in (-pi/2, pi/2]: {phi:?}"
            )));
        }
        Ok(AngleVector { phi })
    }

    pub fn angles(&self) -> &[f64] {
        &self.phi
    }

    pub fn to_unit_vector(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.phi.len() + 1);
        let mut cos_prod = 1.0;
        for p in &self.phi {
            c.push(cos_prod * p.sin());
            cos_prod *= p.cos();
        }
        c.push(cos_prod);
        c
    }

    /// Angles of `c` or `-c`, whichever lies on the parameterized half-sphere.
    pub fn from_unit_vector(c: &[f64]) -> Self {
        use std::f64::consts::FRAC_PI_2;
        let d = c.len();
        assert!(d >= 2, "angle vectors need dimension >= 2");
        let flip = match c.iter().rev().find(|x| **x != 0.0) {
            Some(x) => *x < 0.0,
            None => false,
        };
        let c: Vec<f64> = c.iter().map(|x| if flip { -x } else { *x }).collect();
        let mut phi = Vec::with_capacity(d - 1);
        for t in 0..d - 1 {
            let tail = c[t + 1..].iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut p = c[t].atan2(tail);
            if p <= -FRAC_PI_2 {
                p = FRAC_PI_2;
            }
            phi.push(p);
        }
        AngleVector { phi }
    }
}

/// Deduplicated candidate supports, kept in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateSet {
    supports: Vec<Support>,
}

impl CandidateSet {
    pub fn from_supports<I: IntoIterator<Item = Support>>(supports: I) -> Self {
        let mut supports: Vec<Support> = supports.into_iter().collect();
        supports.sort_unstable();
        supports.dedup();
        CandidateSet { supports }
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn contains(&self, support: &Support) -> bool {
        self.supports.binary_search(support).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Support> {
        self.supports.iter()
    }

    pub fn supports(&self) -> &[Support] {
        &self.supports
    }

    /// Scores every support and returns the best one (parallel max-reduction).
    pub fn best(&self, v: &FactorMatrix) -> Option<Candidate> {
        self.supports
            .par_iter()
            .map(|s| (linalg::support_singular_value(v, s.indices()), s))
            .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
            .map(|(value, s)| Candidate {
                support: s.clone(),
                value,
            })
    }
}

/// `2^(D-1) C(D, floor(D/2)) C(N, D)` for `D >= 2`, and 1 for `D = 1`.
pub fn cardinality_bound(n: usize, d: usize) -> u128 {
    if d <= 1 {
        return 1;
    }
    (1u128 << (d - 1))
        .saturating_mul(binomial(d, d / 2))
        .saturating_mul(binomial(n, d))
}

/// Rank-1 closed form: the `k` largest `|v_n|` (ties to the smaller index),
/// scored by `||v_I||`.
pub fn rank1_solve(v: &[f64], k: usize) -> Result<Candidate> {
    if k == 0 || k > v.len() {
        return Err(Error::InvalidSparsity { k, n: v.len() });
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    let key = |a: &usize, b: &usize| v[*b].abs().total_cmp(&v[*a].abs()).then(a.cmp(b));
    if k < v.len() {
        order.select_nth_unstable_by(k - 1, key);
    }
    order.truncate(k);
    order.sort_unstable();
    let value = order.iter().fold(0.0, |acc, &n| acc + v[n] * v[n]).sqrt();
    Ok(Candidate {
        support: Support::from_sorted(order),
        value,
    })
}

/// Per-worker buffers for visiting vertices.
struct VertexWorker<'a> {
    v: &'a FactorMatrix,
    k: usize,
    tol: Tolerances,
    system: Vec<f64>,
    direction: Vec<f64>,
    scores: Vec<f64>,
    work: Vec<f64>,
    top: TopKResult,
    scratch: TopKScratch,
}

impl<'a> VertexWorker<'a> {
    fn new(v: &'a FactorMatrix, k: usize, tol: Tolerances) -> Self {
        let d = v.cols();
        VertexWorker {
            v,
            k,
            tol,
            system: vec![0.0; (d - 1) * d],
            direction: vec![0.0; d],
            scores: vec![0.0; v.rows()],
            work: Vec::new(),
            top: TopKResult::default(),
            scratch: TopKScratch::default(),
        }
    }

    fn visit(&mut self, rows: &[usize], signs: &[i8], sink: &mut impl FnMut(Support)) {
        let d = self.v.cols();
        let pivot = self.v.row(rows[0]);
        for (t, &b) in signs.iter().enumerate() {
            let other = self.v.row(rows[t + 1]);
            let b = f64::from(b);
            for col in 0..d {
                self.system[t * d + col] = pivot[col] - b * other[col];
            }
        }
        if !linalg::nullspace_into(&self.system, d, self.tol.rank, &mut self.work, &mut self.direction) {
            return;
        }
        self.v.mul_vec_into(&self.direction, &mut self.scores);
        linalg::top_k_into(&self.scores, self.k, self.tol.tie, &mut self.scratch, &mut self.top);
        expand_vertex_ties(&self.top, rows, self.k, sink);
    }
}

/// Turns a tie-aware top-k at a vertex into supports.
///
/// Without a straddling tie the selection itself is the support. Otherwise the
/// tied rows are the meeting rows and every completion of the strict part by
/// `k - |strict|` of them is a neighboring cell's support. Ties that also catch
/// rows outside the vertex (coincident hypersurfaces) enumerate all completions
/// when few, else keep the smallest-index one.
fn expand_vertex_ties(top: &TopKResult, rows: &[usize], k: usize, sink: &mut impl FnMut(Support)) {
    if top.len() == k {
        sink(Support::from_unsorted(top.union()));
        return;
    }
    let need = k - top.strict.len();
    let foreign = top.tied.iter().any(|n| !rows.contains(n));
    if foreign && binomial(top.tied.len(), need) > TIE_EXPANSION_CAP {
        let mut s = top.strict.clone();
        s.extend_from_slice(&top.tied[..need]);
        sink(Support::from_unsorted(s));
        return;
    }
    for pick in Combinations::new(top.tied.len(), need) {
        let mut s = top.strict.clone();
        s.extend(pick.iter().map(|&p| top.tied[p]));
        sink(Support::from_unsorted(s));
    }
}

/// Supports generated by one vertex: rows `rows` (distinct, `D` of them) under
/// sign pattern `pattern`. Rank-deficient vertex systems yield nothing.
pub fn candidates_for_vertex(
    v: &FactorMatrix,
    rows: &[usize],
    pattern: &SignPattern,
    k: usize,
    tol: &Tolerances,
) -> Result<Vec<Support>> {
    let d = v.cols();
    if d < 2 || rows.len() != d || pattern.bits().len() != d - 1 {
        return Err(Error::DimensionMismatch(format!(
            "vertex needs {d} rows and {} signs, got {} and {}",
            d.saturating_sub(1),
            rows.len(),
            pattern.bits().len()
        )));
    }
    if k == 0 || k > v.rows() {
        return Err(Error::InvalidSparsity { k, n: v.rows() });
    }
    let mut out = Vec::new();
    VertexWorker::new(v, k, *tol).visit(rows, pattern.bits(), &mut |s| out.push(s));
    Ok(out)
}

/// Candidate set from all `C(N, D)` row subsets and all `2^(D-1)` sign patterns.
pub fn enumerate_candidates(v: &FactorMatrix, k: usize) -> Result<CandidateSet> {
    enumerate_candidates_with(v, k, &Tolerances::default(), &SignPattern::all(v.cols()))
}

/// As [`enumerate_candidates`], restricted to the given sign patterns.
pub fn enumerate_candidates_with(
    v: &FactorMatrix,
    k: usize,
    tol: &Tolerances,
    patterns: &[SignPattern],
) -> Result<CandidateSet> {
    let (n, d) = (v.rows(), v.cols());
    if k == 0 || k > n {
        return Err(Error::InvalidSparsity { k, n });
    }
    if d == 1 {
        let column: Vec<f64> = (0..n).map(|i| v.get(i, 0)).collect();
        return Ok(CandidateSet::from_supports([rank1_solve(&column, k)?.support]));
    }
    if n < d {
        return Err(Error::DimensionMismatch(format!("need at least {d} rows, got {n}")));
    }
    if let Some(p) = patterns.iter().find(|p| p.bits().len() != d - 1) {
        return Err(Error::DimensionMismatch(format!(
            "sign pattern {:?} does not match rank {d}",
            p.bits()
        )));
    }
    let subsets = binomial(n, d);
    let ranges = split_ranges(subsets, rayon::current_num_threads() * 16);
    let collected = ranges
        .into_par_iter()
        .map(|(start, end)| {
            let mut worker = VertexWorker::new(v, k, *tol);
            let mut local = HashSet::new();
            let mut rows = vec![0; d];
            unrank_combination(start, n, &mut rows);
            let mut sink = |s: Support| {
                local.insert(s);
            };
            for step in start..end {
                for p in patterns {
                    worker.visit(&rows, p.bits(), &mut sink);
                }
                if step + 1 < end {
                    next_combination(&mut rows, n);
                }
            }
            local
        })
        .reduce(HashSet::new, |mut a, b| {
            if a.len() < b.len() {
                return merge(b, a);
            }
            a.extend(b);
            a
        });
    Ok(CandidateSet::from_supports(collected))
}

fn merge(mut big: HashSet<Support>, small: HashSet<Support>) -> HashSet<Support> {
    big.extend(small);
    big
}

#[cfg(test)]
mod tests {
    use super::*;

    fn support(ix: &[usize]) -> Support {
        Support::new(ix.to_vec()).unwrap()
    }

    #[test]
    fn rank1_examples() {
        let c = rank1_solve(&[3.0, -1.0, 2.0], 2).unwrap();
        assert_eq!(c.support, support(&[0, 2]));
        assert!((c.value - 13f64.sqrt()).abs() < 1e-15);

        let c = rank1_solve(&[1.0, 1.0], 1).unwrap();
        assert_eq!(c.support, support(&[0]));
        assert_eq!(c.value, 1.0);

        let c = rank1_solve(&[-2.0, 0.5, 2.0, -2.0], 2).unwrap();
        assert_eq!(c.support, support(&[0, 2]));
    }

    #[test]
    fn rank1_rejects_bad_sparsity() {
        assert!(rank1_solve(&[1.0], 2).is_err());
        assert!(rank1_solve(&[1.0], 0).is_err());
    }

    #[test]
    fn patterns_enumerate_all_signs() {
        let all = SignPattern::all(3);
        assert_eq!(all.len(), 4);
        assert_eq!(all[0].bits(), &[1, 1]);
        assert_eq!(all[1].bits(), &[-1, 1]);
        assert_eq!(all[3].bits(), &[-1, -1]);
        assert_eq!(SignPattern::all(1).len(), 1);
        assert!(SignPattern::new(vec![1, 0]).is_err());
    }

    #[test]
    fn vertex_symmetric_tie() {
        let v = FactorMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let p = SignPattern::new(vec![1]).unwrap();
        let got = candidates_for_vertex(&v, &[0, 1], &p, 1, &Tolerances::default()).unwrap();
        assert_eq!(got, vec![support(&[0]), support(&[1])]);
    }

    #[test]
    fn vertex_dominated_by_third_row() {
        let v = FactorMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [5.0, 5.0]]).unwrap();
        let p = SignPattern::new(vec![1]).unwrap();
        let got = candidates_for_vertex(&v, &[0, 1], &p, 1, &Tolerances::default()).unwrap();
        assert_eq!(got, vec![support(&[2])]);
        // Direct evaluation of |V c| at c = (1, 1)/sqrt(2).
        let u = v.mul_vec(&[std::f64::consts::FRAC_1_SQRT_2; 2]);
        assert!(u[2].abs() > u[0].abs() && u[2].abs() > u[1].abs());
    }

    #[test]
    fn vertex_rank_deficient_is_skipped() {
        let v = FactorMatrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [3.0, 1.0]]).unwrap();
        let plus = SignPattern::new(vec![1]).unwrap();
        assert!(candidates_for_vertex(&v, &[0, 1], &plus, 1, &Tolerances::default())
            .unwrap()
            .is_empty());
        let v = FactorMatrix::from_rows(&[[1.0, 2.0], [-1.0, -2.0], [3.0, 1.0]]).unwrap();
        let minus = SignPattern::new(vec![-1]).unwrap();
        assert!(candidates_for_vertex(&v, &[0, 1], &minus, 1, &Tolerances::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn vertex_rejects_shape_errors() {
        let v = FactorMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let p = SignPattern::new(vec![1, 1]).unwrap();
        assert!(candidates_for_vertex(&v, &[0, 1], &p, 1, &Tolerances::default()).is_err());
    }

    #[test]
    fn two_by_two_contains_optimum() {
        let v = FactorMatrix::from_rows(&[[0.3, -1.2], [0.9, 0.4]]).unwrap();
        let s = enumerate_candidates(&v, 1).unwrap();
        assert!(s.iter().all(|x| x.len() == 1));
        let best = s.best(&v).unwrap();
        let r0 = linalg::support_singular_value(&v, &[0]);
        let r1 = linalg::support_singular_value(&v, &[1]);
        assert_eq!(best.value, r0.max(r1));
    }

    #[test]
    fn bound_values() {
        assert_eq!(cardinality_bound(4, 2), 24);
        assert_eq!(cardinality_bound(10, 3), 4 * 3 * 120);
        assert_eq!(cardinality_bound(7, 1), 1);
    }

    #[test]
    fn angle_vector_parameterization() {
        let a = AngleVector::new(vec![0.3, -0.7]).unwrap();
        let c = a.to_unit_vector();
        assert!((c.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-15);
        let back = AngleVector::from_unit_vector(&c);
        for (x, y) in back.angles().iter().zip(a.angles()) {
            assert!((x - y).abs() < 1e-14);
        }
        let neg: Vec<f64> = c.iter().map(|x| -x).collect();
        assert_eq!(AngleVector::from_unit_vector(&neg), back);
        assert!(AngleVector::new(vec![-std::f64::consts::FRAC_PI_2]).is_err());
    }
}
