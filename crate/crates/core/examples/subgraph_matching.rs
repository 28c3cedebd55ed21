//! Locates a small model graph inside a larger, noisy data graph and
//! compares the result with random injections.

use gncgcp::datasets::{self, GraphFamily, GraphSpec};
use gncgcp::matrix_space::to_matrix;
use gncgcp::objectives::{sgm_value, SubgraphMatching};
use gncgcp::{solve, PartialPermutation, SolverConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gncgcp::Result<()> {
    let family: GraphFamily = "DPN".parse()?;
    let (n_data, n_model) = (20, 10);
    for beta in [0.0, 0.25, 0.5] {
        let spec = GraphSpec { family, size: n_data, seed: 3 };
        let pair = datasets::make_subgraph_pair(&spec, n_model, beta, 3)?;
        let result = solve(&SubgraphMatching::new(pair.pair.clone()), &SolverConfig::default(), None)?;

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut random = 0.0;
        for _ in 0..100 {
            let mut cols: Vec<usize> = (0..n_data).collect();
            cols.shuffle(&mut rng);
            cols.truncate(n_model);
            let p = PartialPermutation::new(cols, n_data)?;
            random += sgm_value(&pair.pair, to_matrix(&p).view())? / 100.0;
        }
        println!(
            "beta {beta:.2}: error {:>9.3} (random {random:>9.3}), {}/{n_model} nodes placed correctly",
            result.final_objective,
            result.solution.agreement(&pair.ground_truth)
        );
    }
    Ok(())
}
