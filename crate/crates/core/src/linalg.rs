//! Dense kernels for small matrices.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{accumulate_outer, FactorMatrix};

/// Outcome of a top-k selection that keeps boundary ties explicit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TopKResult {
    /// Indices whose magnitude is clearly above the k-th largest.
    pub strict: Vec<usize>,
    /// Indices whose magnitude is within tolerance of the k-th largest.
    pub tied: Vec<usize>,
    /// The k-th largest magnitude.
    pub threshold: f64,
}

impl TopKResult {
    /// `strict ∪ tied`, sorted.
    pub fn union(&self) -> Vec<usize> {
        let mut all = Vec::with_capacity(self.strict.len() + self.tied.len());
        all.extend_from_slice(&self.strict);
        all.extend_from_slice(&self.tied);
        all.sort_unstable();
        all
    }

    pub fn len(&self) -> usize {
        self.strict.len() + self.tied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reusable buffers for [`top_k_into`].
#[derive(Debug, Default)]
pub(crate) struct TopKScratch {
    select: Vec<f64>,
}

/// Selects the `k` largest entries of `|u|` in linear time.
///
/// Entries within `tau_tie * max|u|` of the k-th largest magnitude are reported
/// as tied rather than split arbitrarily.
pub fn top_k_indices(u: &[f64], k: usize, tau_tie: f64) -> Result<TopKResult> {
    if k == 0 || k > u.len() {
        return Err(Error::InvalidSparsity { k, n: u.len() });
    }
    let mut out = TopKResult::default();
    top_k_into(u, k, tau_tie, &mut TopKScratch::default(), &mut out);
    Ok(out)
}

pub(crate) fn top_k_into(u: &[f64], k: usize, tau_tie: f64, scratch: &mut TopKScratch, out: &mut TopKResult) {
    debug_assert!(k >= 1 && k <= u.len());
    let sel = &mut scratch.select;
    sel.clear();
    sel.extend(u.iter().map(|x| x.abs()));
    let scale = sel.iter().fold(0.0_f64, |m, &x| m.max(x));
    let (_, kth, _) = sel.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    let threshold = *kth;
    let tol = tau_tie * scale;
    out.strict.clear();
    out.tied.clear();
    out.threshold = threshold;
    for (n, x) in u.iter().enumerate() {
        let m = x.abs();
        if m > threshold + tol {
            out.strict.push(n);
        } else if m >= threshold - tol {
            out.tied.push(n);
        }
    }
}

/// Largest eigenvalue of a symmetric `d x d` Gram matrix, clamped at zero.
pub(crate) fn gram_largest_eigenvalue(g: &[f64], d: usize) -> f64 {
    let l = match d {
        1 => g[0],
        2 => {
            let (a, b, c) = (g[0], g[1], g[3]);
            0.5 * (a + c) + (0.5 * (a - c)).hypot(b)
        }
        _ => jacobi(g, d).0[0],
    };
    l.max(0.0)
}

/// `sigma_max(V_{I,:})` computed through the `D x D` Gram matrix of the rows.
pub fn support_singular_value(v: &FactorMatrix, support: &[usize]) -> f64 {
    let d = v.cols();
    let mut g = [0.0; 16];
    let mut heap;
    let g: &mut [f64] = if d * d <= g.len() {
        &mut g[..d * d]
    } else {
        heap = vec![0.0; d * d];
        &mut heap
    };
    for &n in support {
        accumulate_outer(g, v.row(n));
    }
    gram_largest_eigenvalue(g, d).sqrt()
}

/// Largest singular value of `m` and its unit left singular vector.
///
/// The vector's largest-magnitude entry is made positive. An all-zero `m`
/// yields `(0, e_1)`.
pub fn principal_singular_pair(m: &FactorMatrix) -> (f64, Vec<f64>) {
    let d = m.cols();
    let gram = m.gram();
    let sigma = gram_largest_eigenvalue(&gram, d).sqrt();
    let mut left = vec![0.0; m.rows()];
    if sigma == 0.0 {
        left[0] = 1.0;
        return (0.0, left);
    }
    let (_, vectors) = jacobi(&gram, d);
    let w: Vec<f64> = (0..d).map(|a| vectors[a * d]).collect();
    m.mul_vec_into(&w, &mut left);
    let norm = left.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        left.iter_mut().for_each(|x| *x = 0.0);
        left[0] = 1.0;
        return (sigma, left);
    }
    let mut peak = 0;
    for (n, x) in left.iter().enumerate() {
        if x.abs() > left[peak].abs() {
            peak = n;
        }
    }
    let scale = if left[peak] < 0.0 { -1.0 / norm } else { 1.0 / norm };
    left.iter_mut().for_each(|x| *x *= scale);
    (sigma, left)
}

/// Unit vector spanning the null space of the `(d-1) x d` row-major matrix `b`.
///
/// Returns `None` when `b` has rank below `d - 1`. The first coordinate with
/// magnitude above `1e-14` is made positive.
pub fn nullspace_unit_vector(b: &[f64], d: usize, tau_rank: f64) -> Option<Vec<f64>> {
    assert!(d >= 2, "null-space vectors need d >= 2");
    assert_eq!(b.len(), (d - 1) * d, "expected a (d-1) x d matrix");
    let mut c = vec![0.0; d];
    nullspace_into(b, d, tau_rank, &mut Vec::new(), &mut c).then_some(c)
}

pub(crate) fn nullspace_into(b: &[f64], d: usize, tau_rank: f64, work: &mut Vec<f64>, c: &mut [f64]) -> bool {
    let ok = if d == 2 {
        let (x, y) = (b[0], b[1]);
        let norm = x.hypot(y);
        if norm == 0.0 {
            false
        } else {
            c[0] = -y / norm;
            c[1] = x / norm;
            true
        }
    } else {
        householder_null(b, d, tau_rank, work, c)
    };
    if ok {
        if let Some(first) = c.iter().find(|x| x.abs() > 1e-14) {
            if *first < 0.0 {
                c.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
    ok
}

/// Pivoted Householder QR of `b^T`; the last column of `Q` spans the null
/// space of `b`.
fn householder_null(b: &[f64], d: usize, tau_rank: f64, work: &mut Vec<f64>, c: &mut [f64]) -> bool {
    let m = d - 1;
    let frob = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return false;
    }
    // work layout: a (d x m, column-major, i.e. a[col * d + row]) then m reflectors of length d.
    work.clear();
    work.resize(d * m + m * d, 0.0);
    let (a, refl) = work.split_at_mut(d * m);
    for r in 0..m {
        for col in 0..d {
            // a = b^T, column r of a is row r of b.
            a[r * d + col] = b[r * d + col];
        }
    }
    for step in 0..m {
        // Column pivoting on remaining norms.
        let mut best = step;
        let mut best_norm = -1.0;
        for col in step..m {
            let s: f64 = (step..d).map(|i| a[col * d + i].powi(2)).sum();
            if s > best_norm {
                best_norm = s;
                best = col;
            }
        }
        if best != step {
            for i in 0..d {
                a.swap(step * d + i, best * d + i);
            }
        }
        let alpha = best_norm.sqrt();
        if alpha <= tau_rank * frob {
            return false;
        }
        let x0 = a[step * d + step];
        let beta = if x0 >= 0.0 { -alpha } else { alpha };
        let h = &mut refl[step * d..(step + 1) * d];
        h.iter_mut().for_each(|x| *x = 0.0);
        h[step] = x0 - beta;
        for i in step + 1..d {
            h[i] = a[step * d + i];
        }
        let hn: f64 = h.iter().map(|x| x * x).sum();
        if hn > 0.0 {
            for col in step..m {
                let dot: f64 = (step..d).map(|i| h[i] * a[col * d + i]).sum();
                let f = 2.0 * dot / hn;
                for i in step..d {
                    a[col * d + i] -= f * h[i];
                }
            }
            let s = 1.0 / hn.sqrt();
            h.iter_mut().for_each(|x| *x *= s);
        }
    }
    // c = H_0 H_1 ... H_{m-1} e_{d-1}
    c.iter_mut().for_each(|x| *x = 0.0);
    c[d - 1] = 1.0;
    for step in (0..m).rev() {
        let h = &refl[step * d..(step + 1) * d];
        let dot: f64 = h.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
        for (ci, hi) in c.iter_mut().zip(h) {
            *ci -= 2.0 * dot * hi;
        }
    }
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    c.iter_mut().for_each(|x| *x /= norm);
    true
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl SymmetricEigen {
    #[inline]
    pub fn vector_entry(&self, row: usize, col: usize) -> f64 {
        self.vectors[row * self.n + col]
    }

    pub fn vector(&self, col: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.vector_entry(r, col)).collect()
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric `n x n` row-major matrix.
pub fn symmetric_eigendecomposition(s: &[f64], n: usize) -> Result<SymmetricEigen> {
    if n == 0 || s.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "expected {n}x{n} matrix, got {} entries",
            s.len()
        )));
    }
    let scale = s.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut asymmetry = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            asymmetry = asymmetry.max((s[i * n + j] - s[j * n + i]).abs());
        }
    }
    if asymmetry > 1e-9 * scale {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let (values, vectors) = jacobi(s, n);
    Ok(SymmetricEigen { values, vectors, n })
}

/// Core Jacobi iteration on the symmetrized input. Returns descending
/// eigenvalues and the row-major eigenvector matrix.
fn jacobi(s: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (s[i * n + j] + s[j * n + i]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = cs * akp - sn * akq;
                    a[k * n + q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = cs * apk - sn * aqk;
                    a[q * n + k] = sn * apk + cs * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = cs * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        a[y * n + y]
            .partial_cmp(&a[x * n + x])
            .unwrap_or(Ordering::Equal)
            .then(x.cmp(&y))
    });
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + col] = v[r * n + src];
        }
    }
    (values, vectors)
}
