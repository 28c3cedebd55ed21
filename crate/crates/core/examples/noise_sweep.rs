//! Matching error against noise level for one graph family, written as
//! long-format CSV on stdout (one row per grid cell).
//!
//! ```text
//! cargo run --release --example noise_sweep -- DBN 10 > sweep.csv
//! ```

use gncgcp::harness::{self, Algorithm, MatchingMode, OracleMode, RunOptions, SyntheticGrid};
use gncgcp::SolverConfig;

fn main() -> gncgcp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family = args.first().map_or("DBN", String::as_str).parse()?;
    let trials: usize = args.get(1).map_or(Ok(5), |s| s.parse()).expect("trials must be an integer");

    let betas: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let opts = RunOptions { oracle: OracleMode::Off, ..RunOptions::default() };
    let mut cells = Vec::new();
    for algorithm in [Algorithm::Gm, Algorithm::Sgm] {
        let grid = SyntheticGrid {
            family,
            mode: MatchingMode::Equal,
            sizes: vec![8],
            n_model: None,
            betas: betas.clone(),
            trials,
            seed: 0,
            algorithm,
        };
        let records = harness::run_synthetic(&grid, &SolverConfig::default(), &opts)?;
        cells.extend(harness::summarize(&records));
    }
    harness::write_csv(&cells, std::io::stdout().lock())
}
