#![allow(dead_code)]

use lowrank_spca::FactorMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_factors(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FactorMatrix {
    let data = (0..n * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    FactorMatrix::new(n, d, data).unwrap()
}

/// Small integer entries: many exact ties and coincident rows.
pub fn integer_factors(rng: &mut ChaCha8Rng, n: usize, d: usize, span: i32) -> FactorMatrix {
    let data = (0..n * d).map(|_| f64::from(rng.random_range(-span..=span))).collect();
    FactorMatrix::new(n, d, data).unwrap()
}

/// Normal rows, then some rows replaced by a signed copy of another row and
/// some by zeros.
pub fn degenerate_factors(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FactorMatrix {
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    for i in 1..n {
        match rng.random_range(0..6) {
            0 => {
                let src = rng.random_range(0..i);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                rows[i] = rows[src].iter().map(|x| sign * x).collect();
            }
            1 => rows[i] = vec![0.0; d],
            _ => {}
        }
    }
    FactorMatrix::from_rows(&rows).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
