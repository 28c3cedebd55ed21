#![allow(dead_code)]

use std::path::PathBuf;

use gncgcp::matrix_space::{is_feasible, DEFAULT_TOL_FEAS};
use gncgcp::{PartialPermutation, QapInstance, SubStochasticMatrix};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn qaplib_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join("qaplib")
}

pub fn random_injection(rng: &mut impl Rng, m: usize, n: usize) -> PartialPermutation {
    let mut cols: Vec<usize> = (0..n).collect();
    cols.shuffle(rng);
    cols.truncate(m);
    PartialPermutation::new(cols, n).unwrap()
}

/// `0.2 J/n` plus `0.8` times a random convex combination of partial
/// permutation matrices, so no entry sits on the boundary.
pub fn random_feasible(rng: &mut impl Rng, m: usize, n: usize) -> SubStochasticMatrix {
    let weights: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut x = Array2::from_elem((m, n), 0.2 / n as f64);
    for w in weights {
        let p = random_injection(rng, m, n);
        for (i, &j) in p.as_slice().iter().enumerate() {
            x[[i, j]] += 0.8 * w / total;
        }
    }
    let x = SubStochasticMatrix::new(x, DEFAULT_TOL_FEAS).unwrap();
    assert!(is_feasible(&x, DEFAULT_TOL_FEAS));
    x
}

pub fn random_matrix(rng: &mut impl Rng, m: usize, n: usize, lo: f64, hi: f64) -> Array2<f64> {
    Array2::from_shape_fn((m, n), |_| rng.gen_range(lo..hi))
}

pub fn random_qap(rng: &mut impl Rng, n: usize) -> QapInstance {
    let a = random_matrix(rng, n, n, 0.0, 1.0);
    let b = random_matrix(rng, n, n, 0.0, 1.0);
    QapInstance::new(a, b).unwrap()
}

/// Central differences with step `h`.
pub fn fd_gradient(f: impl Fn(&Array2<f64>) -> f64, x: &Array2<f64>, h: f64) -> Array2<f64> {
    let mut g = Array2::zeros(x.dim());
    let mut p = x.clone();
    for idx in ndarray::indices(x.dim()) {
        let orig = p[idx];
        p[idx] = orig + h;
        let up = f(&p);
        p[idx] = orig - h;
        let down = f(&p);
        p[idx] = orig;
        g[idx] = (up - down) / (2.0 * h);
    }
    g
}

/// `‖a − b‖ / max(‖a‖, ‖b‖, 1e-12)`.
pub fn relative_error(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let norm = |m: &Array2<f64>| m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let diff = a - b;
    norm(&diff) / norm(a).max(norm(b)).max(1e-12)
}

/// Minimum of `Σ c[i][p(i)]` over all injections, by enumeration.
pub fn brute_force_assignment(c: &Array2<f64>) -> f64 {
    fn go(c: &Array2<f64>, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == c.nrows() {
            *best = best.min(acc);
            return;
        }
        for j in 0..c.ncols() {
            if !used[j] {
                used[j] = true;
                go(c, row + 1, used, acc + c[[row, j]], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(c, 0, &mut vec![false; c.ncols()], 0.0, &mut best);
    best
}
