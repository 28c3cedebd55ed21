//! Benchmark harness: runs single QAP instances and synthetic matching
//! grids, and writes the results as CSV or JSON.
//!
//! Costs in a [`RunRecord`] are always recomputed from the returned
//! permutation by the objective functions, never taken from solver state.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::datasets::{self, GraphFamily, GraphSpec, SyntheticPair};
use crate::error::{Error, Result};
use crate::matrix_space::{to_matrix, PartialPermutation};
use crate::objectives::{
    qap_as_gm, qap_as_sgm, qap_value, sgm_value, GraphMatching, GraphPair, Objective, QapInstance,
    QuadraticAssignment, SubgraphMatching,
};
use crate::oracle::{self, DEFAULT_GM_BUDGET, DEFAULT_QAP_LIMIT};
use crate::solver::{self, SolveResult, SolveTrace, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// QAP objective `tr(A X Bᵀ Xᵀ)` directly.
    Qap,
    /// Subgraph-matching objective on a graph pair.
    Sgm,
    /// Convex equal-size graph-matching objective on a graph pair.
    Gm,
    /// QAP solved through the subgraph-matching objective.
    QapAsSgm,
    /// QAP solved through the equal-size graph-matching objective.
    QapAsGm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Qap,
        Algorithm::Sgm,
        Algorithm::Gm,
        Algorithm::QapAsSgm,
        Algorithm::QapAsGm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Qap => "qap",
            Algorithm::Sgm => "sgm",
            Algorithm::Gm => "gm",
            Algorithm::QapAsSgm => "qap_as_sgm",
            Algorithm::QapAsGm => "qap_as_gm",
        }
    }

    fn is_qap(&self) -> bool {
        matches!(self, Algorithm::Qap | Algorithm::QapAsSgm | Algorithm::QapAsGm)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// Exhaustive search whenever the instance is within the oracle's caps.
    #[default]
    Auto,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingMode {
    Equal,
    Subgraph,
}

impl FromStr for MatchingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(MatchingMode::Equal),
            "subgraph" => Ok(MatchingMode::Subgraph),
            _ => Err(Error::InvalidArgument(format!("unknown matching mode {s:?}"))),
        }
    }
}

/// One solver run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub problem: String,
    pub algorithm: Algorithm,
    pub seed: Option<u64>,
    pub family: Option<String>,
    pub mode: Option<MatchingMode>,
    pub beta: Option<f64>,
    pub trial: Option<usize>,
    pub n_model: usize,
    pub n_data: usize,
    /// QAP cost for QAP runs, matching objective for graph runs.
    pub cost: f64,
    pub opt: Option<f64>,
    pub matching_error: Option<f64>,
    pub correct_matches: Option<usize>,
    pub correct_ratio: Option<f64>,
    pub terminated_at_zeta: f64,
    pub reached_vertex: bool,
    pub zeta_steps: usize,
    pub fw_iterations: usize,
    /// Omitted unless timing is requested, so outputs stay reproducible.
    pub wall_time_ms: Option<f64>,
    #[serde(serialize_with = "join_solution")]
    pub solution: Vec<usize>,
    #[serde(skip)]
    pub trace: SolveTrace,
}

fn join_solution<S: Serializer>(sol: &[usize], s: S) -> std::result::Result<S::Ok, S::Error> {
    let text: Vec<String> = sol.iter().map(usize::to_string).collect();
    s.serialize_str(&text.join(" "))
}

impl RunRecord {
    /// `(cost − opt) / opt`, if the optimum is known.
    pub fn relative_excess(&self) -> Option<f64> {
        self.opt.map(|opt| (self.cost - opt) / opt)
    }
}

/// Options shared by all runs.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub oracle: OracleMode,
    /// Known optimum; takes precedence over solution files and the oracle.
    pub opt: Option<f64>,
    pub timing: bool,
}

fn timed<T>(timing: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<f64>)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, timing.then(|| start.elapsed().as_secs_f64() * 1e3)))
}

fn solve_with<O: Objective>(obj: &O, cfg: &SolverConfig) -> Result<SolveResult> {
    solver::solve(obj, cfg, None)
}

/// Solves a QAP with one of the QAP-capable algorithms.
pub fn solve_qap(
    q: &QapInstance,
    algorithm: Algorithm,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    match algorithm {
        Algorithm::Qap => solve_with(&QuadraticAssignment::new(q.clone()), cfg),
        Algorithm::QapAsSgm => solve_with(&SubgraphMatching::new(qap_as_sgm(q)), cfg),
        Algorithm::QapAsGm => solve_with(&GraphMatching::new(qap_as_gm(q))?, cfg),
        other => Err(Error::InvalidArgument(format!(
            "algorithm {other} does not apply to QAP instances"
        ))),
    }
}

/// Solves `q` and reports the QAP cost of the result.
pub fn run_qap_instance(
    problem: &str,
    q: &QapInstance,
    algorithm: Algorithm,
    cfg: &SolverConfig,
    opts: &RunOptions,
) -> Result<RunRecord> {
    let (result, wall) = timed(opts.timing, || solve_qap(q, algorithm, cfg))?;
    let cost = qap_value(q, to_matrix(&result.solution).view())?;
    let opt = match opts.opt {
        Some(v) => Some(v),
        None if opts.oracle == OracleMode::Auto && q.size() <= DEFAULT_QAP_LIMIT => {
            Some(oracle::brute_force_qap(q, DEFAULT_QAP_LIMIT)?.1)
        }
        None => None,
    };
    Ok(record(problem, algorithm, q.size(), q.size(), cost, opt, result, wall))
}

/// Loads a QAPLIB file and solves it. A sibling `<name>.sln` file, when
/// present, supplies the optimum.
pub fn run_qap(path: impl AsRef<Path>, algorithm: Algorithm, cfg: &SolverConfig, opts: &RunOptions) -> Result<RunRecord> {
    let path = path.as_ref();
    if !algorithm.is_qap() {
        return Err(Error::InvalidArgument(format!(
            "algorithm {algorithm} does not apply to QAP instances"
        )));
    }
    let q = datasets::load_qaplib(path)?;
    let mut opts = opts.clone();
    if opts.opt.is_none() {
        let sln: PathBuf = path.with_extension("sln");
        if sln.is_file() {
            opts.opt = Some(datasets::load_qaplib_solution(&sln)?.optimum);
        }
    }
    let problem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    run_qap_instance(&problem, &q, algorithm, cfg, &opts)
}

#[allow(clippy::too_many_arguments)]
fn record(
    problem: &str,
    algorithm: Algorithm,
    n_model: usize,
    n_data: usize,
    cost: f64,
    opt: Option<f64>,
    result: SolveResult,
    wall_time_ms: Option<f64>,
) -> RunRecord {
    RunRecord {
        problem: problem.to_string(),
        algorithm,
        seed: None,
        family: None,
        mode: None,
        beta: None,
        trial: None,
        n_model,
        n_data,
        cost,
        opt,
        matching_error: None,
        correct_matches: None,
        correct_ratio: None,
        terminated_at_zeta: result.terminated_at_zeta,
        reached_vertex: result.reached_vertex,
        zeta_steps: result.trace.len(),
        fw_iterations: result.trace.total_fw_iterations(),
        wall_time_ms,
        solution: result.solution.into_vec(),
        trace: result.trace,
    }
}

/// Solves a graph pair with `sgm` or `gm`.
pub fn solve_graphs(g: &GraphPair, algorithm: Algorithm, cfg: &SolverConfig) -> Result<SolveResult> {
    match algorithm {
        Algorithm::Sgm => solve_with(&SubgraphMatching::new(g.clone()), cfg),
        Algorithm::Gm => solve_with(&GraphMatching::new(g.clone())?, cfg),
        other => Err(Error::InvalidArgument(format!(
            "algorithm {other} does not apply to graph pairs"
        ))),
    }
}

/// Solves a graph pair and scores it with the subgraph-matching objective,
/// against `ground_truth` when one is known.
pub fn run_graph_pair(
    problem: &str,
    g: &GraphPair,
    ground_truth: Option<&PartialPermutation>,
    algorithm: Algorithm,
    cfg: &SolverConfig,
    opts: &RunOptions,
) -> Result<RunRecord> {
    let (result, wall) = timed(opts.timing, || solve_graphs(g, algorithm, cfg))?;
    let error = sgm_value(g, to_matrix(&result.solution).view())?;
    let opt = match opts.opt {
        Some(v) => Some(v),
        None if opts.oracle == OracleMode::Auto
            && oracle::injection_count(g.model_size(), g.data_size()) <= DEFAULT_GM_BUDGET =>
        {
            Some(oracle::brute_force_gm(g, DEFAULT_GM_BUDGET)?.1)
        }
        None => None,
    };
    let correct = ground_truth.map(|gt| result.solution.agreement(gt));
    let mut rec = record(problem, algorithm, g.model_size(), g.data_size(), error, opt, result, wall);
    rec.matching_error = Some(error);
    rec.correct_matches = correct;
    rec.correct_ratio = correct.map(|c| c as f64 / g.model_size() as f64);
    Ok(rec)
}

/// A grid of synthetic matching experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticGrid {
    pub family: GraphFamily,
    pub mode: MatchingMode,
    /// Data-graph sizes. In equal mode the model graph has the same size.
    pub sizes: Vec<usize>,
    /// Model-graph size in subgraph mode.
    pub n_model: Option<usize>,
    pub betas: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
}

impl SyntheticGrid {
    fn cells(&self) -> Result<Vec<(usize, usize, f64, usize)>> {
        if self.sizes.is_empty() || self.betas.is_empty() || self.trials == 0 {
            return Err(Error::InvalidArgument("grid needs sizes, betas and at least one trial".into()));
        }
        let mut cells = Vec::new();
        for &n_data in &self.sizes {
            let n_model = match self.mode {
                MatchingMode::Equal => n_data,
                MatchingMode::Subgraph => self
                    .n_model
                    .ok_or_else(|| Error::InvalidArgument("subgraph mode needs a model size".into()))?,
            };
            for &beta in &self.betas {
                for trial in 0..self.trials {
                    cells.push((n_model, n_data, beta, trial));
                }
            }
        }
        Ok(cells)
    }
}

/// Generates the pair for one trial. Trial `t` uses seed `seed + t`.
pub fn synthetic_pair(grid: &SyntheticGrid, n_model: usize, n_data: usize, beta: f64, trial: usize) -> Result<SyntheticPair> {
    let seed = grid.seed.wrapping_add(trial as u64);
    let spec = GraphSpec {
        family: grid.family,
        size: n_data,
        seed,
    };
    match grid.mode {
        MatchingMode::Equal => datasets::make_equal_pair(&spec, beta, seed),
        MatchingMode::Subgraph => datasets::make_subgraph_pair(&spec, n_model, beta, seed),
    }
}

/// Runs every cell of the grid, in parallel across trials. The output order
/// is size, then beta, then trial.
pub fn run_synthetic(grid: &SyntheticGrid, cfg: &SolverConfig, opts: &RunOptions) -> Result<Vec<RunRecord>> {
    if !matches!(grid.algorithm, Algorithm::Sgm | Algorithm::Gm) {
        return Err(Error::InvalidArgument(format!(
            "synthetic grids use sgm or gm, not {}",
            grid.algorithm
        )));
    }
    if grid.algorithm == Algorithm::Gm && grid.mode == MatchingMode::Subgraph {
        return Err(Error::InvalidArgument("gm needs equal-size graphs".into()));
    }
    cfg.validate()?;
    grid.cells()?
        .into_par_iter()
        .map(|(n_model, n_data, beta, trial)| {
            let pair = synthetic_pair(grid, n_model, n_data, beta, trial)?;
            let code = grid.family.code();
            let problem = format!("{code}-{n_model}x{n_data}-b{beta}-t{trial}");
            let mut rec = run_graph_pair(&problem, &pair.pair, Some(&pair.ground_truth), grid.algorithm, cfg, opts)?;
            rec.seed = Some(grid.seed.wrapping_add(trial as u64));
            rec.family = Some(code);
            rec.mode = Some(grid.mode);
            rec.beta = Some(beta);
            rec.trial = Some(trial);
            Ok(rec)
        })
        .collect()
}

/// Mean relative excess over the optimum, in percent.
pub fn awar(records: &[RunRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("awar of an empty record set".into()));
    }
    let mut total = 0.0;
    for r in records {
        total += r.relative_excess().ok_or_else(|| Error::MissingOptimum(r.problem.clone()))?;
    }
    Ok(100.0 * total / records.len() as f64)
}

/// Per-cell aggregate of a synthetic grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub family: String,
    pub algorithm: Algorithm,
    pub n_model: usize,
    pub n_data: usize,
    pub beta: f64,
    pub trials: usize,
    pub mean_error: f64,
    pub mean_opt: Option<f64>,
    pub mean_correct_ratio: Option<f64>,
    /// Fraction of trials whose error matches the optimum (relative 1e-9).
    pub optimal_fraction: Option<f64>,
}

/// Groups records by (family, algorithm, sizes, beta) in first-seen order.
pub fn summarize(records: &[RunRecord]) -> Vec<CellSummary> {
    let mut groups: Vec<(String, Algorithm, usize, usize, f64, Vec<&RunRecord>)> = Vec::new();
    for r in records {
        let family = r.family.clone().unwrap_or_else(|| r.problem.clone());
        let beta = r.beta.unwrap_or(0.0);
        match groups.iter_mut().find(|g| {
            g.0 == family && g.1 == r.algorithm && g.2 == r.n_model && g.3 == r.n_data && g.4 == beta
        }) {
            Some(g) => g.5.push(r),
            None => groups.push((family, r.algorithm, r.n_model, r.n_data, beta, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(family, algorithm, n_model, n_data, beta, rs)| {
            let k = rs.len() as f64;
            let mean = |f: &dyn Fn(&RunRecord) -> Option<f64>| -> Option<f64> {
                let vals: Option<Vec<f64>> = rs.iter().map(|r| f(r)).collect();
                vals.map(|v| v.iter().sum::<f64>() / k)
            };
            CellSummary {
                family,
                algorithm,
                n_model,
                n_data,
                beta,
                trials: rs.len(),
                mean_error: rs.iter().map(|r| r.cost).sum::<f64>() / k,
                mean_opt: mean(&|r| r.opt),
                mean_correct_ratio: mean(&|r| r.correct_ratio),
                optimal_fraction: mean(&|r| r.opt.map(|o| f64::from(u8::from(r.cost <= o + 1e-9 * (1.0 + o.abs()))))),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidArgument(format!("unknown output format {s:?}"))),
        }
    }
}

#[derive(Serialize)]
struct TraceRow {
    zeta: f64,
    objective_value: f64,
    gap: f64,
    fw_iterations: usize,
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    #[serde(flatten)]
    record: &'a RunRecord,
    trace: Vec<TraceRow>,
}

/// One CSV row per record, header first.
pub fn write_csv<W: Write, T: Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))
}

/// Pretty JSON array of records, each with its per-zeta trace summary.
pub fn write_json<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let rows: Vec<JsonRecord<'_>> = records
        .iter()
        .map(|record| JsonRecord {
            record,
            trace: record
                .trace
                .records
                .iter()
                .map(|z| TraceRow {
                    zeta: z.zeta,
                    objective_value: z.objective_value,
                    gap: z.gap,
                    fw_iterations: z.fw_iterations,
                })
                .collect(),
        })
        .collect();
    serde_json::to_writer_pretty(out, &rows).map_err(|e| Error::Output(e.to_string()))
}

pub fn write_records<W: Write>(records: &[RunRecord], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(records, out),
        OutputFormat::Json => write_json(records, out),
    }
}
