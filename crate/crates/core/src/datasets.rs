//! Problem instances: QAPLIB files, plain graph-pair files and the synthetic
//! graph families used for matching benchmarks.
//!
//! A synthetic family is a three-letter code:
//!
//! | letter | choices |
//! |--------|---------|
//! | 1 | `D` directed, `U` undirected |
//! | 2 | `B` binomial degrees (`G(N, 0.5)`), `P` power-law degrees `P(k) ∝ k^-1.5` |
//! | 3 | `L` standard log-normal weights, `N` absolute standard-normal weights |
//!
//! All randomness is drawn from ChaCha8 streams keyed by explicit 64-bit
//! seeds, so every generated graph, noise pattern and relabeling is
//! reproducible bit for bit.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_space::PartialPermutation;
use crate::objectives::{GraphPair, QapInstance};

/// Edge probability of the binomial family.
pub const BINOMIAL_EDGE_PROB: f64 = 0.5;
/// Exponent of the power-law degree family.
pub const POWER_LAW_EXPONENT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeDist {
    Binomial,
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightDist {
    LogNormal,
    AbsNormal,
}

impl WeightDist {
    fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            WeightDist::LogNormal => LogNormal::new(0.0, 1.0).expect("valid parameters").sample(rng),
            WeightDist::AbsNormal => {
                let z: f64 = rng.sample(StandardNormal);
                z.abs()
            }
        }
    }
}

/// One of the eight synthetic graph families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphFamily {
    pub directed: bool,
    pub degree: DegreeDist,
    pub weight: WeightDist,
}

impl GraphFamily {
    pub const ALL: [GraphFamily; 8] = [
        GraphFamily::new(true, DegreeDist::Binomial, WeightDist::LogNormal),
        GraphFamily::new(true, DegreeDist::Binomial, WeightDist::AbsNormal),
        GraphFamily::new(true, DegreeDist::PowerLaw, WeightDist::LogNormal),
        GraphFamily::new(true, DegreeDist::PowerLaw, WeightDist::AbsNormal),
        GraphFamily::new(false, DegreeDist::Binomial, WeightDist::LogNormal),
        GraphFamily::new(false, DegreeDist::Binomial, WeightDist::AbsNormal),
        GraphFamily::new(false, DegreeDist::PowerLaw, WeightDist::LogNormal),
        GraphFamily::new(false, DegreeDist::PowerLaw, WeightDist::AbsNormal),
    ];

    pub const fn new(directed: bool, degree: DegreeDist, weight: WeightDist) -> Self {
        GraphFamily { directed, degree, weight }
    }

    pub fn code(&self) -> String {
        let d = if self.directed { 'D' } else { 'U' };
        let k = match self.degree {
            DegreeDist::Binomial => 'B',
            DegreeDist::PowerLaw => 'P',
        };
        let w = match self.weight {
            WeightDist::LogNormal => 'L',
            WeightDist::AbsNormal => 'N',
        };
        format!("{d}{k}{w}")
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::FamilyCode(s.to_string());
        let code = s.to_ascii_uppercase();
        let chars: Vec<char> = code.chars().collect();
        if chars.len() != 3 {
            return Err(bad());
        }
        let directed = match chars[0] {
            'D' => true,
            'U' => false,
            _ => return Err(bad()),
        };
        let degree = match chars[1] {
            'B' => DegreeDist::Binomial,
            'P' => DegreeDist::PowerLaw,
            _ => return Err(bad()),
        };
        let weight = match chars[2] {
            'L' => WeightDist::LogNormal,
            'N' => WeightDist::AbsNormal,
            _ => return Err(bad()),
        };
        Ok(GraphFamily { directed, degree, weight })
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub family: GraphFamily,
    pub size: usize,
    pub seed: u64,
}

/// A generated matching problem with its planted correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub pair: GraphPair,
    /// Row `i` of the model graph corresponds to column `ground_truth[i]` of
    /// the data graph.
    pub ground_truth: PartialPermutation,
    pub beta: f64,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// Stream ids keep the graph, noise and relabeling draws independent.
const STREAM_GRAPH: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_LABELS: u64 = 2;

/// Random weighted adjacency matrix with zero diagonal; symmetric when the
/// family is undirected.
pub fn generate_graph(spec: &GraphSpec) -> Result<Array2<f64>> {
    let n = spec.size;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("graph size must be at least 2, got {n}")));
    }
    let mut rng = rng_for(spec.seed, STREAM_GRAPH);
    let fam = spec.family;

    let edge_prob: Box<dyn Fn(usize, usize) -> f64> = match fam.degree {
        DegreeDist::Binomial => Box::new(|_, _| BINOMIAL_EDGE_PROB),
        DegreeDist::PowerLaw => {
            let targets = power_law_degrees(&mut rng, n);
            let total: f64 = targets.iter().sum();
            Box::new(move |i, j| (targets[i] * targets[j] / total).min(1.0))
        }
    };

    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        let cols = if fam.directed { 0..n } else { i + 1..n };
        for j in cols {
            if i == j {
                continue;
            }
            if rng.gen::<f64>() < edge_prob(i, j) {
                let w = fam.weight.sample(&mut rng);
                a[[i, j]] = w;
                if !fam.directed {
                    a[[j, i]] = w;
                }
            }
        }
    }
    Ok(a)
}

/// Expected degrees drawn from `P(k) ∝ k^-1.5` on `1..n`.
fn power_law_degrees(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let weights: Vec<f64> = (1..n).map(|k| (k as f64).powf(-POWER_LAW_EXPONENT)).collect();
    let dist = WeightedIndex::new(&weights).expect("positive weights");
    (0..n).map(|_| (dist.sample(rng) + 1) as f64).collect()
}

/// Number of edges: unordered pairs for undirected graphs, ordered pairs
/// otherwise. Diagonal entries are ignored.
pub fn edge_count(a: &Array2<f64>, directed: bool) -> usize {
    edge_slots(a.nrows(), directed)
        .filter(|&(i, j)| a[[i, j]] != 0.0)
        .count()
}

fn edge_slots(n: usize, directed: bool) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| {
        let start = if directed { 0 } else { i + 1 };
        (start..n).filter(move |&j| j != i).map(move |j| (i, j))
    })
}

/// Inserts `round(beta · |E|)` edges at uniformly chosen empty slots, or
/// every empty slot if there are fewer. Existing edges are kept.
pub fn add_noise(a: &Array2<f64>, family: GraphFamily, beta: f64, seed: u64) -> Result<Array2<f64>> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("noise level must be a nonnegative number, got {beta}")));
    }
    let mut rng = rng_for(seed, STREAM_NOISE);
    let mut out = a.clone();
    let edges = edge_count(a, family.directed);
    let empty: Vec<(usize, usize)> = edge_slots(a.nrows(), family.directed)
        .filter(|&(i, j)| a[[i, j]] == 0.0)
        .collect();
    let wanted = (beta * edges as f64).round() as usize;
    let k = wanted.min(empty.len());
    let mut picked = index::sample(&mut rng, empty.len(), k).into_vec();
    // Fix the draw order of the weights independent of the sampler's output order.
    picked.sort_unstable();
    for idx in picked {
        let (i, j) = empty[idx];
        let w = family.weight.sample(&mut rng);
        out[[i, j]] = w;
        if !family.directed {
            out[[j, i]] = w;
        }
    }
    Ok(out)
}

/// Relabels `a` so that new node `i` is old node `labels[i]`.
fn relabel(a: &Array2<f64>, labels: &[usize]) -> Array2<f64> {
    let n = labels.len();
    Array2::from_shape_fn((n, n), |(i, j)| a[[labels[i], labels[j]]])
}

/// Equal-size pair: data graph from `spec`, model graph is the noisy data
/// graph under a uniformly random relabeling.
pub fn make_equal_pair(spec: &GraphSpec, beta: f64, seed: u64) -> Result<SyntheticPair> {
    let data = generate_graph(spec)?;
    let noisy = add_noise(&data, spec.family, beta, seed)?;
    let mut labels: Vec<usize> = (0..spec.size).collect();
    labels.shuffle(&mut rng_for(seed, STREAM_LABELS));
    let model = relabel(&noisy, &labels);
    Ok(SyntheticPair {
        pair: GraphPair::new(model, data)?,
        ground_truth: PartialPermutation::new(labels, spec.size)?,
        beta,
    })
}

/// Subgraph pair: the model graph is the subgraph induced by `n_m` random
/// data nodes (in random order), plus noise.
pub fn make_subgraph_pair(spec: &GraphSpec, n_m: usize, beta: f64, seed: u64) -> Result<SyntheticPair> {
    if n_m == 0 || n_m > spec.size {
        return Err(Error::InvalidArgument(format!(
            "model size {n_m} must lie in 1..={}",
            spec.size
        )));
    }
    let data = generate_graph(spec)?;
    let mut rng = rng_for(seed, STREAM_LABELS);
    let mut nodes = index::sample(&mut rng, spec.size, n_m).into_vec();
    nodes.shuffle(&mut rng);
    let induced = relabel(&data, &nodes);
    let model = add_noise(&induced, spec.family, beta, seed)?;
    Ok(SyntheticPair {
        pair: GraphPair::new(model, data)?,
        ground_truth: PartialPermutation::new(nodes, spec.size)?,
        beta,
    })
}

/// Whitespace-separated numbers with the line each one came from.
fn tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .flat_map(|(i, line)| line.split_whitespace().map(move |t| (i + 1, t)))
}

struct TokenReader<'a, I: Iterator<Item = (usize, &'a str)>> {
    inner: I,
    last_line: usize,
    path: Option<&'a Path>,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> TokenReader<'a, I> {
    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.map(Path::to_path_buf),
            line,
            msg: msg.into(),
        }
    }

    fn next_raw(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((line, tok)) => {
                self.last_line = line;
                Ok((line, tok))
            }
            None => Err(self.err(self.last_line, format!("unexpected end of input while reading {what}"))),
        }
    }

    fn size(&mut self, what: &str) -> Result<usize> {
        let (line, tok) = self.next_raw(what)?;
        match tok.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(self.err(line, format!("{what} must be a positive integer, found {tok:?}"))),
        }
    }

    fn matrix(&mut self, n: usize, what: &str) -> Result<Array2<f64>> {
        let mut values = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            let (line, tok) = self.next_raw(what)?;
            let v: f64 = tok
                .parse()
                .map_err(|_| self.err(line, format!("malformed number {tok:?} in {what}")))?;
            if !v.is_finite() {
                return Err(self.err(line, format!("non-finite number {tok:?} in {what}")));
            }
            values.push(v);
        }
        Ok(Array2::from_shape_vec((n, n), values).expect("n*n values"))
    }

    fn finish(&mut self) -> Result<()> {
        if let Some((line, tok)) = self.inner.next() {
            return Err(self.err(
                line,
                format!("unexpected trailing token {tok:?} (instances with a linear term are not supported)"),
            ));
        }
        Ok(())
    }
}

fn reader<'a>(text: &'a str, path: Option<&'a Path>) -> TokenReader<'a, impl Iterator<Item = (usize, &'a str)>> {
    TokenReader {
        inner: tokens(text),
        last_line: 1,
        path,
    }
}

/// Parses a QAPLIB instance: `n`, then `A` and `B` row-major.
pub fn parse_qaplib(text: &str) -> Result<QapInstance> {
    parse_qaplib_at(text, None)
}

fn parse_qaplib_at(text: &str, path: Option<&Path>) -> Result<QapInstance> {
    let mut r = reader(text, path);
    let n = r.size("instance size")?;
    let a = r.matrix(n, "matrix A")?;
    let b = r.matrix(n, "matrix B")?;
    r.finish()?;
    QapInstance::new(a, b)
}

pub fn load_qaplib(path: impl AsRef<Path>) -> Result<QapInstance> {
    let path = path.as_ref();
    parse_qaplib_at(&read_text(path)?, Some(path))
}

/// A QAPLIB solution file: `n opt` followed by a 1-based permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct QaplibSolution {
    pub optimum: f64,
    pub permutation: Vec<usize>,
}

pub fn parse_qaplib_solution(text: &str) -> Result<QaplibSolution> {
    parse_solution_at(text, None)
}

fn parse_solution_at(text: &str, path: Option<&Path>) -> Result<QaplibSolution> {
    let mut r = reader(text, path);
    let n = r.size("instance size")?;
    let (line, tok) = r.next_raw("optimum")?;
    let optimum: f64 = tok
        .parse()
        .map_err(|_| r.err(line, format!("malformed optimum {tok:?}")))?;
    let mut permutation = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, tok) = r.next_raw("permutation")?;
        match tok.parse::<usize>() {
            Ok(v) if (1..=n).contains(&v) => permutation.push(v - 1),
            _ => return Err(r.err(line, format!("permutation entry {tok:?} is not in 1..={n}"))),
        }
    }
    r.finish()?;
    PartialPermutation::new(permutation.clone(), n)
        .map_err(|e| r.err(line, e.to_string()))?;
    Ok(QaplibSolution { optimum, permutation })
}

pub fn load_qaplib_solution(path: impl AsRef<Path>) -> Result<QaplibSolution> {
    let path = path.as_ref();
    parse_solution_at(&read_text(path)?, Some(path))
}

/// Parses a graph pair: `m`, `A_M` (m² entries), `n`, `A_D` (n² entries).
pub fn parse_graph_pair(text: &str) -> Result<GraphPair> {
    parse_graph_pair_at(text, None)
}

fn parse_graph_pair_at(text: &str, path: Option<&Path>) -> Result<GraphPair> {
    let mut r = reader(text, path);
    let m = r.size("model size")?;
    let a_m = r.matrix(m, "model adjacency")?;
    let n = r.size("data size")?;
    let a_d = r.matrix(n, "data adjacency")?;
    r.finish()?;
    if m > n {
        return Err(r.err(r.last_line, format!("model size {m} exceeds data size {n}")));
    }
    GraphPair::new(a_m, a_d)
}

pub fn load_graph_pair(path: impl AsRef<Path>) -> Result<GraphPair> {
    let path = path.as_ref();
    parse_graph_pair_at(&read_text(path)?, Some(path))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
