//! Solves QAPLIB instances and reports cost, optimum and awar.
//!
//! ```text
//! cargo run --release --example solve_qaplib -- crates/core/data/qaplib/chr12c.dat
//! ```

use std::time::Instant;

use gncgcp::harness::{self, Algorithm, RunOptions};
use gncgcp::SolverConfig;

fn main() -> gncgcp::Result<()> {
    let mut paths: Vec<String> = std::env::args().skip(1).collect();
    if paths.is_empty() {
        paths.push(concat!(env!("CARGO_MANIFEST_DIR"), "/data/qaplib/chr12c.dat").to_string());
    }
    let cfg = SolverConfig::default();
    let mut records = Vec::new();
    for path in &paths {
        for algorithm in [Algorithm::Qap, Algorithm::QapAsSgm, Algorithm::QapAsGm] {
            let start = Instant::now();
            let rec = harness::run_qap(path, algorithm, &cfg, &RunOptions::default())?;
            println!(
                "{:<10} {:<11} cost {:>10} opt {:>10} zeta {:>7.3} steps {:>5} fw {:>6} {:.2}s",
                rec.problem,
                rec.algorithm.to_string(),
                rec.cost,
                rec.opt.map_or("-".into(), |o| o.to_string()),
                rec.terminated_at_zeta,
                rec.zeta_steps,
                rec.fw_iterations,
                start.elapsed().as_secs_f64()
            );
            records.push(rec);
        }
    }
    if records.iter().all(|r| r.opt.is_some()) {
        println!("awar {:.3}%", harness::awar(&records)?);
    }
    Ok(())
}
