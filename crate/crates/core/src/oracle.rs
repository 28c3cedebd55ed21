//! Exhaustive search for small instances.
//!
//! Enumerates every injection in lexicographic order and keeps the first
//! strict minimum, so ties resolve to the lexicographically smallest map.
//! The objective is accumulated incrementally along the search tree; the
//! top-level branches run in parallel.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix_space::{to_matrix, PartialPermutation};
use crate::objectives::{qap_value, sgm_value, GraphPair, QapInstance};

/// Largest QAP size searched by default (10! ≈ 3.6M permutations).
pub const DEFAULT_QAP_LIMIT: usize = 10;
/// Default cap on the number of injections for graph matching.
pub const DEFAULT_GM_BUDGET: u128 = 5_000_000;

/// Number of injections of `m` rows into `n` columns.
pub fn injection_count(m: usize, n: usize) -> u128 {
    if m > n {
        return 0;
    }
    ((n - m + 1)..=n).fold(1u128, |acc, k| acc.saturating_mul(k as u128))
}

/// Global QAP minimum over all permutations, for `size <= limit`.
pub fn brute_force_qap(q: &QapInstance, limit: usize) -> Result<(PartialPermutation, f64)> {
    let n = q.size();
    if n > limit {
        return Err(Error::SearchTooLarge {
            count: injection_count(n, n),
            limit: injection_count(limit, limit),
        });
    }
    let (a, b) = (q.a(), q.b());
    let best = search(n, n, |i, c, prefix| {
        let mut s = a[[i, i]] * b[[c, c]];
        for (k, &pk) in prefix.iter().enumerate() {
            s += a[[i, k]] * b[[c, pk]] + a[[k, i]] * b[[pk, c]];
        }
        s
    });
    let perm = PartialPermutation::new(best, n)?;
    let value = qap_value(q, to_matrix(&perm).view())?;
    Ok((perm, value))
}

/// Global minimum of the subgraph-matching objective over all injections,
/// if their number is at most `budget`.
pub fn brute_force_gm(g: &GraphPair, budget: u128) -> Result<(PartialPermutation, f64)> {
    let (m, n) = (g.model_size(), g.data_size());
    let count = injection_count(m, n);
    if count > budget {
        return Err(Error::SearchTooLarge { count, limit: budget });
    }
    let (am, ad) = (g.model(), g.data());
    let best = search(m, n, |i, c, prefix| {
        let d = am[[i, i]] - ad[[c, c]];
        let mut s = d * d;
        for (k, &pk) in prefix.iter().enumerate() {
            let d1 = am[[i, k]] - ad[[c, pk]];
            let d2 = am[[k, i]] - ad[[pk, c]];
            s += d1 * d1 + d2 * d2;
        }
        s
    });
    let perm = PartialPermutation::new(best, n)?;
    let value = sgm_value(g, to_matrix(&perm).view())?;
    Ok((perm, value))
}

/// `step(i, c, prefix)` is the cost added by mapping row `i` to column `c`
/// given the columns of rows `0..i`.
fn search<F>(m: usize, n: usize, step: F) -> Vec<usize>
where
    F: Fn(usize, usize, &[usize]) -> f64 + Sync,
{
    let branches: Vec<(f64, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut state = Dfs {
                m,
                used: vec![false; n],
                prefix: Vec::with_capacity(m),
                best_cost: f64::INFINITY,
                best: Vec::new(),
                step: &step,
            };
            state.used[first] = true;
            state.prefix.push(first);
            let c0 = step(0, first, &[]);
            state.descend(c0);
            (state.best_cost, state.best)
        })
        .collect();
    // Branches are in column order, so the first strict minimum is the
    // lexicographically smallest.
    let mut best: Option<(f64, Vec<usize>)> = None;
    for (cost, perm) in branches {
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, perm));
        }
    }
    best.expect("at least one column").1
}

struct Dfs<'a, F> {
    m: usize,
    used: Vec<bool>,
    prefix: Vec<usize>,
    best_cost: f64,
    best: Vec<usize>,
    step: &'a F,
}

impl<F: Fn(usize, usize, &[usize]) -> f64> Dfs<'_, F> {
    fn descend(&mut self, cost: f64) {
        let i = self.prefix.len();
        if i == self.m {
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best.clone_from(&self.prefix);
            }
            return;
        }
        for c in 0..self.used.len() {
            if self.used[c] {
                continue;
            }
            let add = (self.step)(i, c, &self.prefix);
            self.used[c] = true;
            self.prefix.push(c);
            self.descend(cost + add);
            self.prefix.pop();
            self.used[c] = false;
        }
    }
}
