//! Plugging a user-defined objective into the solver. Only the value and
//! the gradient are needed; here a linear assignment cost `tr CᵀX` plus a
//! quadratic penalty that discourages assigning rows 0 and 1 to adjacent
//! columns.

use gncgcp::{solve, Dims, LineSearch, Objective, SolverConfig};
use ndarray::{array, Array2, ArrayView2};

struct PenalizedAssignment {
    cost: Array2<f64>,
    penalty: f64,
}

impl PenalizedAssignment {
    fn adjacency(&self, x: ArrayView2<'_, f64>) -> f64 {
        let n = x.ncols();
        (0..n - 1).map(|j| x[[0, j]] * x[[1, j + 1]] + x[[0, j + 1]] * x[[1, j]]).sum()
    }
}

impl Objective for PenalizedAssignment {
    fn dims(&self) -> Dims {
        Dims::new(self.cost.nrows(), self.cost.ncols()).expect("valid shape")
    }

    fn value(&self, x: ArrayView2<'_, f64>) -> f64 {
        (&self.cost * &x).sum() + self.penalty * self.adjacency(x)
    }

    fn gradient(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut g = self.cost.clone();
        let n = x.ncols();
        for j in 0..n - 1 {
            g[[0, j]] += self.penalty * x[[1, j + 1]];
            g[[1, j + 1]] += self.penalty * x[[0, j]];
            g[[0, j + 1]] += self.penalty * x[[1, j]];
            g[[1, j]] += self.penalty * x[[0, j + 1]];
        }
        g
    }

    fn polynomial_degree(&self) -> Option<usize> {
        Some(2)
    }
}

fn main() -> gncgcp::Result<()> {
    let cost = array![
        [1.0, 2.0, 6.0, 5.0],
        [2.0, 1.0, 5.0, 6.0],
        [4.0, 3.0, 1.0, 2.0],
    ];
    for penalty in [0.0, 10.0] {
        let obj = PenalizedAssignment { cost: cost.clone(), penalty };
        for line_search in [LineSearch::ExactPolynomial, LineSearch::Backtracking] {
            let cfg = SolverConfig { line_search, ..SolverConfig::default() };
            let result = solve(&obj, &cfg, None)?;
            println!(
                "penalty {penalty:>4}  {line_search:?}: rows -> {:?}, value {}",
                result.solution.as_slice(),
                result.final_objective
            );
        }
    }
    Ok(())
}
