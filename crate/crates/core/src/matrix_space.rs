//! Feasible sets of the relaxation.
//!
//! Rows index the `m` model items and columns the `n` data items, with
//! `m <= n`. A [`PartialPermutation`] is an injective row-to-column map (a
//! vertex of the polytope); a [`SubStochasticMatrix`] is a point of its
//! convex hull: nonnegative, every row summing to one, every column summing
//! to at most one.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::assignment::{self, CostMatrix};
use crate::error::{Error, Result};

/// Feasibility tolerance used by internal assertions.
pub const DEFAULT_TOL_FEAS: f64 = 1e-8;

/// Distance to `{0, 1}` under which an entry counts as discrete.
pub const DEFAULT_DELTA_DISCRETE: f64 = 1e-3;

/// Shape of a matching problem: `m` model rows into `n` data columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    m: usize,
    n: usize,
}

impl Dims {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::dim("row count must be at least 1"));
        }
        if m > n {
            return Err(Error::dim(format!(
                "row count {m} exceeds column count {n}"
            )));
        }
        Ok(Dims { m, n })
    }

    pub fn square(n: usize) -> Result<Self> {
        Dims::new(n, n)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn is_square(&self) -> bool {
        self.m == self.n
    }

    pub(crate) fn of_view(x: &ArrayView2<'_, f64>) -> Result<Self> {
        let (m, n) = x.dim();
        Dims::new(m, n)
    }
}

/// A point of the doubly sub-stochastic polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct SubStochasticMatrix {
    dims: Dims,
    entries: Array2<f64>,
}

impl SubStochasticMatrix {
    /// Wraps `entries`, rejecting matrices that are infeasible at `tol_feas`.
    pub fn new(entries: Array2<f64>, tol_feas: f64) -> Result<Self> {
        let dims = Dims::of_view(&entries.view())?;
        check_finite(&entries.view())?;
        if let Some(why) = infeasibility(&entries.view(), tol_feas) {
            return Err(Error::Infeasible(why));
        }
        Ok(SubStochasticMatrix { dims, entries })
    }

    /// Wraps `entries` after checking only the shape.
    ///
    /// Used for points the caller knows to be feasible up to rounding, such
    /// as convex combinations of feasible points.
    pub fn from_array_unchecked(entries: Array2<f64>) -> Result<Self> {
        let dims = Dims::of_view(&entries.view())?;
        Ok(SubStochasticMatrix { dims, entries })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_array(self) -> Array2<f64> {
        self.entries
    }

    /// `tr XᵀX`, the squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum()
    }

    /// `self + alpha * (other - self)`.
    pub fn step_towards(&self, other: &SubStochasticMatrix, alpha: f64) -> SubStochasticMatrix {
        debug_assert_eq!(self.dims, other.dims);
        let mut entries = self.entries.clone();
        entries.zip_mut_with(&other.entries, |x, &y| *x += alpha * (y - *x));
        SubStochasticMatrix {
            dims: self.dims,
            entries,
        }
    }
}

/// An injective map from the `m` rows to the `n` columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialPermutation {
    dims: Dims,
    assignment: Vec<usize>,
}

impl PartialPermutation {
    /// Builds a map sending row `i` to column `assignment[i]` among `n`
    /// columns.
    pub fn new(assignment: Vec<usize>, n: usize) -> Result<Self> {
        let dims = Dims::new(assignment.len(), n)?;
        let mut seen = vec![false; n];
        for (row, &col) in assignment.iter().enumerate() {
            if col >= n {
                return Err(Error::InvalidAssignment(format!(
                    "row {row} maps to column {col}, but there are only {n} columns"
                )));
            }
            if std::mem::replace(&mut seen[col], true) {
                return Err(Error::InvalidAssignment(format!(
                    "column {col} is used more than once"
                )));
            }
        }
        Ok(PartialPermutation { dims, assignment })
    }

    pub fn identity(n: usize) -> Result<Self> {
        PartialPermutation::new((0..n).collect(), n)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.assignment
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.assignment
    }

    /// Column matched to `row`.
    pub fn get(&self, row: usize) -> usize {
        self.assignment[row]
    }

    /// Number of rows on which `self` and `other` agree.
    pub fn agreement(&self, other: &PartialPermutation) -> usize {
        self.assignment
            .iter()
            .zip(&other.assignment)
            .filter(|(a, b)| a == b)
            .count()
    }
}

/// The point with every entry `1/n`, the unique minimizer of `tr XᵀX` over
/// the polytope.
pub fn uniform_barycenter(dims: Dims) -> SubStochasticMatrix {
    SubStochasticMatrix {
        dims,
        entries: Array2::from_elem(dims.shape(), 1.0 / dims.n() as f64),
    }
}

pub fn is_feasible(x: &SubStochasticMatrix, tol_feas: f64) -> bool {
    x.entries.iter().all(|v| v.is_finite()) && infeasibility(&x.view(), tol_feas).is_none()
}

/// True iff every entry lies within `delta` of 0 or 1.
pub fn is_discrete(x: &SubStochasticMatrix, delta: f64) -> bool {
    x.entries
        .iter()
        .all(|&v| v.abs() <= delta || (v - 1.0).abs() <= delta)
}

/// Nearest vertex in the sense of maximal selected mass `Σ X[i, σ(i)]`.
pub fn round_to_permutation(x: &SubStochasticMatrix) -> PartialPermutation {
    let costs = CostMatrix::from_array_unchecked(x.entries.mapv(|v| -v));
    assignment::solve_min_unchecked(&costs)
}

/// Binary matrix with `X[i, σ(i)] = 1`.
pub fn to_matrix(p: &PartialPermutation) -> SubStochasticMatrix {
    let mut entries = Array2::zeros(p.dims.shape());
    for (row, &col) in p.assignment.iter().enumerate() {
        entries[[row, col]] = 1.0;
    }
    SubStochasticMatrix {
        dims: p.dims,
        entries,
    }
}

pub(crate) fn check_finite(x: &ArrayView2<'_, f64>) -> Result<()> {
    match x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        Some(((row, col), _)) => Err(Error::NonFiniteEntry { row, col }),
        None => Ok(()),
    }
}

fn infeasibility(x: &ArrayView2<'_, f64>, tol: f64) -> Option<String> {
    if let Some(((i, j), v)) = x.indexed_iter().find(|(_, &v)| v < -tol) {
        return Some(format!("entry ({i}, {j}) = {v} is negative"));
    }
    for (i, row) in x.rows().into_iter().enumerate() {
        let s = row.sum();
        if (s - 1.0).abs() > tol {
            return Some(format!("row {i} sums to {s}"));
        }
    }
    for (j, col) in x.columns().into_iter().enumerate() {
        let s = col.sum();
        if s > 1.0 + tol {
            return Some(format!("column {j} sums to {s}"));
        }
    }
    None
}
