//! Independent oracles and seeded generators shared by the integration tests.
#![allow(dead_code)]

use mtmc::{CriteriaVector, EvaluationMatrix, FoldSummary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every pair checked directly: row i survives unless some other row is
/// no worse everywhere and better somewhere.
pub fn brute_force_front(rows: &[Vec<f64>]) -> Vec<usize> {
    (0..rows.len())
        .filter(|&i| {
            !(0..rows.len()).any(|k| {
                k != i
                    && rows[k].iter().zip(&rows[i]).all(|(a, b)| a <= b)
                    && rows[k].iter().zip(&rows[i]).any(|(a, b)| a < b)
            })
        })
        .collect()
}

/// Random rows; half the time drawn from a small integer grid so ties and
/// duplicates are common.
pub fn random_rows(rng: &mut impl Rng, n_rows: usize, n_criteria: usize) -> Vec<Vec<f64>> {
    let coarse = rng.random_bool(0.5);
    (0..n_rows)
        .map(|_| {
            (0..n_criteria)
                .map(|_| {
                    if coarse {
                        f64::from(rng.random_range(0..4u8))
                    } else {
                        rng.random_range(0.0..1.0)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn matrix_of(rows: &[Vec<f64>]) -> EvaluationMatrix {
    EvaluationMatrix::from_rows(rows.iter().cloned().map(CriteriaVector::from)).unwrap()
}

pub fn values(rows: &[CriteriaVector]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r.values().to_vec()).collect()
}

/// Textbook two-pass mean and (n - 1) variance.
pub fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

pub fn criteria_oracle(folds: &[FoldSummary]) -> [f64; 4] {
    let errors: Vec<f64> = folds.iter().map(|f| 1.0 - f.max_accuracy).collect();
    let epochs: Vec<f64> = folds
        .iter()
        .map(|f| f64::from(f.convergence_epoch))
        .collect();
    let (em, ev) = two_pass(&errors);
    let (pm, pv) = two_pass(&epochs);
    [em, ev, pm, pv]
}

/// Direct evaluation of dot(s, w) / |w| per row, then the first minimum.
pub fn projection_argmin(scaled: &[Vec<f64>], phi: &[f64]) -> (Vec<f64>, usize) {
    let norm = phi.iter().map(|w| w * w).sum::<f64>().sqrt();
    let p: Vec<f64> = scaled
        .iter()
        .map(|s| s.iter().zip(phi).map(|(a, b)| a * b).sum::<f64>() / norm)
        .collect();
    let best = first_argmin(&p);
    (p, best)
}

pub fn first_argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x < xs[best] {
            best = i;
        }
    }
    best
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
