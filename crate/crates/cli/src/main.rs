use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gncgcp::datasets::{self, GraphFamily};
use gncgcp::harness::{self, Algorithm, MatchingMode, OracleMode, OutputFormat, RunOptions, RunRecord, SyntheticGrid};
use gncgcp::{Error, LineSearch, SolverConfig};

/// Graduated nonconvexity and concavity solver for QAP and graph matching.
#[derive(Parser)]
#[command(name = "gncgcp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Decrement of zeta per outer step.
    #[arg(long, global = true, default_value_t = 0.001)]
    dzeta: f64,
    /// Relative Frank-Wolfe gap tolerance.
    #[arg(long, global = true, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, global = true, default_value_t = 30)]
    max_fw_iters: usize,
    #[arg(long, global = true, value_enum, default_value_t = LineSearchArg::Exact)]
    line_search: LineSearchArg,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Compute the optimum by exhaustive search when the instance is small.
    #[arg(long, global = true, value_enum, default_value_t = OracleArg::Auto)]
    oracle: OracleArg,
    /// Record wall time (makes the output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve QAPLIB instances. A sibling `.sln` file supplies the optimum.
    Qap {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// qap, qap_as_sgm or qap_as_gm.
        #[arg(long, default_value = "qap")]
        algorithm: Algorithm,
        /// Known optimum, overriding solution files and the oracle.
        #[arg(long)]
        opt: Option<f64>,
    },
    /// Match a graph pair file (`m`, `m x m` model, `n`, `n x n` data).
    Match {
        path: PathBuf,
        /// sgm or gm.
        #[arg(long, default_value = "sgm")]
        algorithm: Algorithm,
    },
    /// Run a synthetic matching grid.
    Synthetic {
        /// Three-letter family code such as DBL or UPN.
        #[arg(long)]
        family: GraphFamily,
        #[arg(long, default_value = "equal")]
        mode: MatchingMode,
        /// Data-graph sizes.
        #[arg(long, value_delimiter = ',', default_value = "8")]
        sizes: Vec<usize>,
        /// Model-graph size in subgraph mode.
        #[arg(long)]
        n_model: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// sgm or gm.
        #[arg(long, default_value = "sgm")]
        algorithm: Algorithm,
        /// Emit one aggregated row per grid cell instead of one per trial.
        #[arg(long)]
        summary: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LineSearchArg {
    Exact,
    Backtracking,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Auto,
    Off,
}

impl Common {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            d_zeta: self.dzeta,
            epsilon: self.epsilon,
            max_fw_iters: self.max_fw_iters,
            line_search: match self.line_search {
                LineSearchArg::Exact => LineSearch::ExactPolynomial,
                LineSearchArg::Backtracking => LineSearch::Backtracking,
            },
            ..SolverConfig::default()
        }
    }

    fn run_options(&self, opt: Option<f64>) -> RunOptions {
        RunOptions {
            oracle: match self.oracle {
                OracleArg::Auto => OracleMode::Auto,
                OracleArg::Off => OracleMode::Off,
            },
            opt,
            timing: self.timing,
        }
    }

    fn format(&self) -> OutputFormat {
        match self.format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }

    fn sink(&self) -> gncgcp::Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn emit(common: &Common, records: &[RunRecord]) -> gncgcp::Result<()> {
    let mut out = common.sink()?;
    harness::write_records(records, common.format(), &mut out)?;
    if common.format() == OutputFormat::Json {
        writeln!(out).map_err(|e| Error::Output(e.to_string()))?;
    }
    out.flush().map_err(|e| Error::Output(e.to_string()))
}

fn run(cli: Cli) -> gncgcp::Result<()> {
    let common = &cli.common;
    let cfg = common.config();
    cfg.validate()?;
    match cli.command {
        Command::Qap { paths, algorithm, opt } => {
            let opts = common.run_options(opt);
            let records = paths
                .iter()
                .map(|p| harness::run_qap(p, algorithm, &cfg, &opts))
                .collect::<gncgcp::Result<Vec<_>>>()?;
            emit(common, &records)?;
            if records.iter().all(|r| r.opt.is_some()) {
                eprintln!("awar {:.3}%", harness::awar(&records)?);
            }
        }
        Command::Match { path, algorithm } => {
            let g = datasets::load_graph_pair(&path)?;
            let problem = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
            let rec = harness::run_graph_pair(&problem, &g, None, algorithm, &cfg, &common.run_options(None))?;
            emit(common, &[rec])?;
        }
        Command::Synthetic {
            family,
            mode,
            sizes,
            n_model,
            betas,
            trials,
            seed,
            algorithm,
            summary,
        } => {
            let grid = SyntheticGrid {
                family,
                mode,
                sizes,
                n_model,
                betas,
                trials,
                seed,
                algorithm,
            };
            let records = harness::run_synthetic(&grid, &cfg, &common.run_options(None))?;
            if summary {
                let cells = harness::summarize(&records);
                let mut out = common.sink()?;
                match common.format() {
                    OutputFormat::Csv => harness::write_csv(&cells, &mut out)?,
                    OutputFormat::Json => {
                        serde_json::to_writer_pretty(&mut out, &cells).map_err(|e| Error::Output(e.to_string()))?;
                        writeln!(out).map_err(|e| Error::Output(e.to_string()))?;
                    }
                }
                out.flush().map_err(|e| Error::Output(e.to_string()))?;
            } else {
                emit(common, &records)?;
            }
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    if err.is_numerical() {
        3
    } else if err.is_input() || matches!(err, Error::Output(_)) {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
