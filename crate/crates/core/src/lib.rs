//! Graduated nonconvexity and graduated concavity for optimization over
//! partial permutation matrices.
//!
//! Given a smooth objective `F(X)` on `m x n` matrices (`m <= n`), the
//! solver relaxes the set of partial permutations to the doubly
//! sub-stochastic polytope and follows the family
//!
//! ```text
//! F_zeta(X) = (1 - |zeta|) F(X) + zeta tr XᵀX,   zeta from 1 down to -1
//! ```
//!
//! minimizing each member with Frank-Wolfe. Only the gradient of `F` is
//! required: the convex start and concave finish come from the `tr XᵀX` term
//! and never have to be constructed for a specific problem.
//!
//! ```no_run
//! use gncgcp::{datasets, objectives::QuadraticAssignment, solver};
//!
//! let q = datasets::load_qaplib("crates/core/data/qaplib/chr12c.dat")?;
//! let result = solver::solve(&QuadraticAssignment::new(q), &Default::default(), None)?;
//! println!("cost {}", result.final_objective);
//! # Ok::<(), gncgcp::Error>(())
//! ```
//!
//! Modules:
//! - [`matrix_space`]: partial permutations and the doubly sub-stochastic polytope
//! - [`assignment`]: rectangular Hungarian method (the Frank-Wolfe oracle)
//! - [`solver`]: the annealing loop
//! - [`objectives`]: subgraph matching, graph matching, QAP and QAP adapters
//! - [`datasets`]: QAPLIB parsing and synthetic graph pairs
//! - [`oracle`]: exhaustive search for small instances
//! - [`harness`]: benchmark runs, aggregation and CSV/JSON output

pub mod assignment;
pub mod datasets;
mod error;
pub mod harness;
pub mod matrix_space;
pub mod objectives;
pub mod oracle;
pub mod solver;

pub use error::{Error, Result};
pub use matrix_space::{Dims, PartialPermutation, SubStochasticMatrix};
pub use objectives::{Convexity, GraphPair, Objective, QapInstance};
pub use solver::{solve, LineSearch, SolveResult, SolverConfig};
