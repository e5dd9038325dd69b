//! Lexicographic k-subsets and their ranks.

/// `C(n, k)`, saturating at `u128::MAX` when an intermediate product overflows.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        match acc.checked_mul((n - i) as u128) {
            Some(x) => acc = x / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// Writes the `rank`-th (0-based, lexicographic) k-subset of `0..n` into `out`.
///
/// `out.len()` is `k`; `rank < C(n, k)`.
pub fn unrank_combination(mut rank: u128, n: usize, out: &mut [usize]) {
    let k = out.len();
    debug_assert!(rank < binomial(n, k));
    let mut next = 0;
    for (slot, o) in out.iter_mut().enumerate() {
        let remaining = k - slot - 1;
        let mut candidate = next;
        loop {
            let block = binomial(n - candidate - 1, remaining);
            if rank < block {
                break;
            }
            rank -= block;
            candidate += 1;
        }
        *o = candidate;
        next = candidate + 1;
    }
}

/// Advances `comb` to its lexicographic successor among k-subsets of `0..n`.
/// Returns `false` (leaving `comb` untouched) at the last subset.
pub fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Iterator over all k-subsets of `0..n` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        if !next_combination(&mut self.current, self.n) {
            self.done = true;
        }
        Some(out)
    }
}

/// Splits `0..total` into at most `parts` contiguous, near-equal ranges.
pub(crate) fn split_ranges(total: u128, parts: usize) -> Vec<(u128, u128)> {
    if total == 0 {
        return Vec::new();
    }
    let parts = (parts.max(1) as u128).min(total);
    let base = total / parts;
    let extra = total % parts;
    let mut out = Vec::with_capacity(parts as usize);
    let mut start = 0;
    for p in 0..parts {
        let len = base + u128::from(p < extra);
        out.push((start, start + len));
        start += len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(4, 4), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(40, 20), 137_846_528_820);
        assert_eq!(binomial(30, 25), 142_506);
    }

    #[test]
    fn combinations_lexicographic() {
        let all: Vec<_> = Combinations::new(3, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(Combinations::new(4, 4).count(), 1);
    }

    #[test]
    fn counts_match_binomial() {
        for n in 1..=20 {
            for k in 1..=n.min(6) {
                assert_eq!(Combinations::new(n, k).count() as u128, binomial(n, k));
            }
        }
    }

    #[test]
    fn unrank_agrees_with_iteration() {
        for (n, k) in [(7, 3), (6, 1), (5, 5), (9, 4)] {
            let mut out = vec![0; k];
            for (rank, comb) in Combinations::new(n, k).enumerate() {
                unrank_combination(rank as u128, n, &mut out);
                assert_eq!(out, comb);
            }
        }
    }

    #[test]
    fn ranges_cover_exactly() {
        let r = split_ranges(10, 3);
        assert_eq!(r, vec![(0, 4), (4, 7), (7, 10)]);
        assert_eq!(split_ranges(2, 8).len(), 2);
        assert!(split_ranges(0, 4).is_empty());
    }
}
