//! Compares the solver with exhaustive search on small random QAP instances.

use gncgcp::objectives::QuadraticAssignment;
use gncgcp::{oracle, solve, QapInstance, SolverConfig};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> gncgcp::Result<()> {
    let n = 7;
    let mut optimal = 0;
    let trials = 20;
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Array2::from_shape_fn((n, n), |_| rng.gen_range(0.0..1.0));
        let b = Array2::from_shape_fn((n, n), |_| rng.gen_range(0.0..1.0));
        let q = QapInstance::new(a, b)?;
        let result = solve(&QuadraticAssignment::new(q.clone()), &SolverConfig::default(), None)?;
        let (best, opt) = oracle::brute_force_qap(&q, oracle::DEFAULT_QAP_LIMIT)?;
        let excess = 100.0 * (result.final_objective - opt) / opt;
        if excess.abs() < 1e-9 {
            optimal += 1;
        }
        println!(
            "seed {seed:>2}: solver {:.4}  optimum {opt:.4} {:?}  excess {excess:.2}%",
            result.final_objective,
            best.as_slice()
        );
    }
    println!("optimal in {optimal}/{trials}");
    Ok(())
}
