//! Rectangular minimum-cost linear assignment.
//!
//! Shortest augmenting path Hungarian method with row/column potentials. It
//! works natively on `m x n` matrices with `m <= n`: every row is assigned,
//! surplus columns stay free. Runs in `O(m^2 n)` and accepts costs of any
//! sign, since the potentials absorb offsets.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::matrix_space::{check_finite, Dims, PartialPermutation};

/// Finite `m x n` assignment costs with `m <= n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    dims: Dims,
    costs: Array2<f64>,
}

impl CostMatrix {
    pub fn new(costs: Array2<f64>) -> Result<Self> {
        let dims = Dims::of_view(&costs.view())?;
        check_finite(&costs.view())?;
        Ok(CostMatrix { dims, costs })
    }

    pub(crate) fn from_array_unchecked(costs: Array2<f64>) -> Self {
        let (m, n) = costs.dim();
        CostMatrix {
            dims: Dims::new(m, n).expect("caller passes valid dims"),
            costs,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.costs.view()
    }

    /// Total cost of the rows' selected columns.
    pub fn cost_of(&self, p: &PartialPermutation) -> f64 {
        p.as_slice()
            .iter()
            .enumerate()
            .map(|(i, &j)| self.costs[[i, j]])
            .sum()
    }
}

/// Exact minimum-cost injective assignment of rows to columns.
pub fn solve_min(c: &CostMatrix) -> PartialPermutation {
    solve_min_unchecked(c)
}

/// Validates `costs` and solves in one step.
pub fn solve_min_array(costs: ArrayView2<'_, f64>) -> Result<PartialPermutation> {
    let (m, n) = costs.dim();
    if m > n {
        return Err(Error::dim(format!(
            "cost matrix has {m} rows but only {n} columns"
        )));
    }
    check_finite(&costs)?;
    Ok(hungarian(costs))
}

pub(crate) fn solve_min_unchecked(c: &CostMatrix) -> PartialPermutation {
    hungarian(c.costs.view())
}

fn hungarian(c: ArrayView2<'_, f64>) -> PartialPermutation {
    let (m, n) = c.dim();
    // 1-based internally; index 0 is the virtual root of each search tree.
    let mut u = vec![0.0f64; m + 1];
    let mut v = vec![0.0f64; n + 1];
    // row_of[j]: row currently matched to column j (0 = free).
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut min_slack = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=m {
        row_of[0] = i;
        let mut j0 = 0usize;
        min_slack.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = c[[i0 - 1, j - 1]] - u[i0] - v[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        // Flip the augmenting path back to the root.
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; m];
    for j in 1..=n {
        if row_of[j] > 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    PartialPermutation::new(assignment, n).expect("hungarian output is injective")
}
