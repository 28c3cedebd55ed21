//! The annealing loop.
//!
//! For a fixed `zeta` the solver minimizes
//!
//! ```text
//! F_zeta(X) = (1 - zeta) F(X) + zeta tr XᵀX    for 0 <= zeta <= 1
//! F_zeta(X) = (1 + zeta) F(X) + zeta tr XᵀX    for -1 <= zeta < 0
//! ```
//!
//! over the doubly sub-stochastic polytope with Frank-Wolfe, then lowers
//! `zeta` by `d_zeta` and warm-starts from the previous minimizer. At
//! `zeta = 1` the problem is strictly convex; as `zeta` approaches `-1` it
//! becomes concave and the iterate is pushed onto a vertex. The loop stops
//! as soon as the iterate is a partial permutation.

use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{Error, Result};
use crate::matrix_space::{
    is_discrete, is_feasible, round_to_permutation, to_matrix, uniform_barycenter,
    PartialPermutation, SubStochasticMatrix, DEFAULT_DELTA_DISCRETE, DEFAULT_TOL_FEAS,
};
use crate::objectives::{Convexity, Objective};

const ARMIJO_C: f64 = 1e-4;
const BACKTRACK_SHRINK: f64 = 0.5;
const BACKTRACK_MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSearch {
    /// Global minimizer of the polynomial restriction on `[0, 1]`.
    #[default]
    ExactPolynomial,
    /// Armijo backtracking from a full step.
    Backtracking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub d_zeta: f64,
    pub epsilon: f64,
    pub delta_discrete: f64,
    pub max_fw_iters: usize,
    pub line_search: LineSearch,
    /// Overrides the start derived from the objective's convexity.
    pub zeta_start: Option<f64>,
    pub abs_gap_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            d_zeta: 0.001,
            epsilon: 0.001,
            delta_discrete: DEFAULT_DELTA_DISCRETE,
            max_fw_iters: 30,
            line_search: LineSearch::ExactPolynomial,
            zeta_start: None,
            abs_gap_floor: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_zeta > 0.0 && self.d_zeta <= 1.0) {
            return Err(Error::Config(format!("d_zeta must lie in (0, 1], got {}", self.d_zeta)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.delta_discrete > 0.0) {
            return Err(Error::Config(format!(
                "delta_discrete must be positive, got {}",
                self.delta_discrete
            )));
        }
        if self.max_fw_iters == 0 {
            return Err(Error::Config("max_fw_iters must be at least 1".into()));
        }
        if !(self.abs_gap_floor >= 0.0) {
            return Err(Error::Config("abs_gap_floor must be nonnegative".into()));
        }
        if let Some(z) = self.zeta_start {
            if !(-1.0..=1.0).contains(&z) {
                return Err(Error::Config(format!("zeta_start must lie in [-1, 1], got {z}")));
            }
        }
        Ok(())
    }

    fn schedule(&self, convexity: Convexity) -> (f64, f64, bool) {
        // (start, end, end inclusive)
        match convexity {
            Convexity::General => (self.zeta_start.unwrap_or(1.0), -1.0, true),
            Convexity::Convex => (self.zeta_start.unwrap_or(0.0), -1.0, true),
            Convexity::Concave => (self.zeta_start.unwrap_or(1.0), 0.0, false),
        }
    }
}

/// Telemetry for one value of `zeta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaRecord {
    pub zeta: f64,
    /// `F_zeta` at the block's final iterate.
    pub objective_value: f64,
    /// Last linearized drop `tr ∇F_zeta(X)ᵀ(Y − X)`.
    pub gap: f64,
    pub fw_iterations: usize,
    /// `F_zeta` at the block's starting point followed by every accepted
    /// iterate.
    pub fw_values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub records: Vec<ZetaRecord>,
}

impl SolveTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_fw_iterations(&self) -> usize {
        self.records.iter().map(|r| r.fw_iterations).sum()
    }

    /// Largest increase of `F_zeta` between consecutive iterates of one
    /// block, or 0 if every block is monotone.
    pub fn max_block_increase(&self) -> f64 {
        self.records
            .iter()
            .flat_map(|r| r.fw_values.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: PartialPermutation,
    /// `F` at the solution's matrix, recomputed from the objective.
    pub final_objective: f64,
    pub terminated_at_zeta: f64,
    /// Whether the last iterate was already discrete, so rounding kept it.
    pub reached_vertex: bool,
    /// Last continuous iterate before rounding.
    pub relaxed: SubStochasticMatrix,
    pub trace: SolveTrace,
}

fn zeta_weight(zeta: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&zeta) {
        return Err(Error::ZetaOutOfRange(zeta));
    }
    Ok(if zeta >= 0.0 { 1.0 - zeta } else { 1.0 + zeta })
}

fn blended_value(obj: &(impl Objective + ?Sized), x: ArrayView2<'_, f64>, weight: f64, zeta: f64) -> f64 {
    let f = if weight == 0.0 { 0.0 } else { obj.value(x) };
    let sq: f64 = x.iter().map(|v| v * v).sum();
    weight * f + zeta * sq
}

/// `F_zeta(X)`.
pub fn combined_value<O: Objective + ?Sized>(obj: &O, x: &SubStochasticMatrix, zeta: f64) -> Result<f64> {
    let w = zeta_weight(zeta)?;
    Ok(blended_value(obj, x.view(), w, zeta))
}

/// `∇F_zeta(X) = w(zeta) ∇F(X) + 2 zeta X`.
pub fn combined_gradient<O: Objective + ?Sized>(
    obj: &O,
    x: &SubStochasticMatrix,
    zeta: f64,
) -> Result<Array2<f64>> {
    let w = zeta_weight(zeta)?;
    Ok(blended_gradient(obj, x.view(), w, zeta))
}

fn blended_gradient(obj: &(impl Objective + ?Sized), x: ArrayView2<'_, f64>, weight: f64, zeta: f64) -> Array2<f64> {
    let mut g = if weight == 0.0 {
        Array2::zeros(x.dim())
    } else {
        let mut g = obj.gradient(x);
        g *= weight;
        g
    };
    g.scaled_add(2.0 * zeta, &x);
    g
}

/// Vertex minimizing the linearization `tr Gᵀ Y` over the polytope.
pub fn fw_direction(grad: ArrayView2<'_, f64>) -> Result<PartialPermutation> {
    assignment::solve_min_array(grad)
}

/// `linearized_drop` is `tr ∇F_zeta(X)ᵀ(Y − X)`, nonpositive when `Y` is the
/// Frank-Wolfe vertex. The test is relative to `|F + drop|`, the value of the
/// linearization at `Y`, with an absolute floor for a vanishing denominator.
pub fn converged(linearized_drop: f64, f_value: f64, epsilon: f64, abs_gap_floor: f64) -> bool {
    let gap = linearized_drop.abs();
    gap < epsilon * (f_value + linearized_drop).abs() || gap < abs_gap_floor
}

/// Step length `alpha ∈ [0, 1]` along `Y − X` for `F_zeta`. Never ascends.
pub fn line_search<O: Objective + ?Sized>(
    obj: &O,
    zeta: f64,
    x: &SubStochasticMatrix,
    y: &SubStochasticMatrix,
    mode: LineSearch,
) -> Result<f64> {
    let w = zeta_weight(zeta)?;
    let f_x = blended_value(obj, x.view(), w, zeta);
    let g = blended_gradient(obj, x.view(), w, zeta);
    let slope = frobenius_inner(&g.view(), &y.view(), &x.view());
    Ok(Segment::new(obj, x, y, w, zeta).search(f_x, slope, mode).0)
}

fn frobenius_inner(g: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>, x: &ArrayView2<'_, f64>) -> f64 {
    let mut acc = 0.0;
    Zip::from(g).and(y).and(x).for_each(|&g, &y, &x| acc += g * (y - x));
    acc
}

/// `alpha ↦ F_zeta(X + alpha (Y − X))`.
struct Segment<'a, O: ?Sized> {
    obj: &'a O,
    x: ArrayView2<'a, f64>,
    y: ArrayView2<'a, f64>,
    weight: f64,
    zeta: f64,
}

impl<'a, O: Objective + ?Sized> Segment<'a, O> {
    fn new(obj: &'a O, x: &'a SubStochasticMatrix, y: &'a SubStochasticMatrix, weight: f64, zeta: f64) -> Self {
        Segment {
            obj,
            x: x.view(),
            y: y.view(),
            weight,
            zeta,
        }
    }

    fn point(&self, alpha: f64) -> Array2<f64> {
        let mut p = self.x.to_owned();
        Zip::from(&mut p).and(&self.y).for_each(|p, &y| *p += alpha * (y - *p));
        p
    }

    fn eval(&self, alpha: f64) -> f64 {
        blended_value(self.obj, self.point(alpha).view(), self.weight, self.zeta)
    }

    /// Returns `(alpha, phi(alpha))`.
    fn search(&self, f_x: f64, slope: f64, mode: LineSearch) -> (f64, f64) {
        let degree = if self.weight == 0.0 {
            Some(2)
        } else {
            self.obj.polynomial_degree().map(|d| d.max(2))
        };
        match (mode, degree) {
            (LineSearch::ExactPolynomial, Some(d)) => self.exact(f_x, slope, d),
            _ => self.backtracking(f_x, slope),
        }
    }

    fn exact(&self, f_x: f64, slope: f64, degree: usize) -> (f64, f64) {
        if let Some(coeffs) = self.closed_form() {
            return self.minimize_known(&coeffs, f_x);
        }
        // phi(0) and phi'(0) pin the constant and linear coefficients; the
        // rest come from samples at k/(degree-1).
        let samples: Vec<(f64, f64)> = (1..degree)
            .map(|k| {
                let t = k as f64 / (degree - 1) as f64;
                (t, self.eval(t))
            })
            .collect();
        let coeffs = fit_polynomial(f_x, slope, &samples);

        let mut best = (0.0, f_x);
        let at_one = samples.last().map(|s| s.1).unwrap_or(f64::INFINITY);
        if at_one < best.1 {
            best = (1.0, at_one);
        }
        for root in real_roots_in(&derivative(&coeffs), 0.0, 1.0) {
            if root <= 0.0 || root >= 1.0 {
                continue;
            }
            let v = self.eval(root);
            if v < best.1 {
                best = (root, v);
            }
        }
        best
    }

    /// Coefficients of `phi` from the objective's own expansion plus the
    /// `zeta ‖X + tD‖²` term.
    fn closed_form(&self) -> Option<Vec<f64>> {
        let d = &self.y - &self.x;
        let mut coeffs = if self.weight == 0.0 {
            vec![0.0; 3]
        } else {
            let mut c = self.obj.restriction(self.x, d.view())?;
            c.iter_mut().for_each(|v| *v *= self.weight);
            c.resize(c.len().max(3), 0.0);
            c
        };
        let xx: f64 = self.x.iter().map(|v| v * v).sum();
        let xd: f64 = self.x.iter().zip(d.iter()).map(|(a, b)| a * b).sum();
        let dd: f64 = d.iter().map(|v| v * v).sum();
        coeffs[0] += self.zeta * xx;
        coeffs[1] += 2.0 * self.zeta * xd;
        coeffs[2] += self.zeta * dd;
        Some(coeffs)
    }

    /// Picks the best of 0, 1 and the interior critical points by the
    /// polynomial, then confirms it with one evaluation of `phi`.
    fn minimize_known(&self, coeffs: &[f64], f_x: f64) -> (f64, f64) {
        let mut best = (0.0, horner(coeffs, 0.0));
        let mut consider = |t: f64| {
            let v = horner(coeffs, t);
            if v < best.1 {
                best = (t, v);
            }
        };
        consider(1.0);
        for root in real_roots_in(&derivative(coeffs), 0.0, 1.0) {
            if root > 0.0 && root < 1.0 {
                consider(root);
            }
        }
        if best.0 == 0.0 {
            return (0.0, f_x);
        }
        let v = self.eval(best.0);
        if v < f_x {
            (best.0, v)
        } else {
            (0.0, f_x)
        }
    }

    fn backtracking(&self, f_x: f64, slope: f64) -> (f64, f64) {
        if slope >= 0.0 {
            return (0.0, f_x);
        }
        let mut alpha = 1.0;
        while alpha >= BACKTRACK_MIN_STEP {
            let v = self.eval(alpha);
            if v <= f_x + ARMIJO_C * alpha * slope {
                return (alpha, v);
            }
            alpha *= BACKTRACK_SHRINK;
        }
        (0.0, f_x)
    }
}

/// Monomial coefficients `c[0] + c[1] t + ...` of the polynomial of degree
/// `samples.len() + 1` with the given value and slope at 0 and values at the
/// sample points.
fn fit_polynomial(value0: f64, slope0: f64, samples: &[(f64, f64)]) -> Vec<f64> {
    let k = samples.len();
    // Unknowns c[2..=k+1]: Σ_j c[j] t^j = phi(t) − c0 − c1 t.
    let mut a = vec![vec![0.0; k + 1]; k];
    for (row, &(t, v)) in samples.iter().enumerate() {
        for col in 0..k {
            a[row][col] = t.powi(col as i32 + 2);
        }
        a[row][k] = v - value0 - slope0 * t;
    }
    let higher = gaussian_solve(a);
    let mut coeffs = vec![value0, slope0];
    coeffs.extend(higher);
    coeffs
}

/// Solves the augmented system in place with partial pivoting.
fn gaussian_solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        a.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for c in col..=n {
                a[row][c] -= factor * a[col][c];
            }
        }
    }
    let mut out = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = a[row][n];
        for c in row + 1..n {
            s -= a[row][c] * out[c];
        }
        out[row] = s / a[row][row];
    }
    out
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| i as f64 * c)
        .collect()
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

/// Real roots of the polynomial in `[lo, hi]`, found by splitting the
/// interval at the derivative's roots and bisecting each monotone piece.
fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    match c.len() {
        0 | 1 => return Vec::new(),
        2 => {
            let r = -c[0] / c[1];
            return if (lo..=hi).contains(&r) { vec![r] } else { Vec::new() };
        }
        _ => {}
    }
    let mut breaks = vec![lo];
    breaks.extend(real_roots_in(&derivative(&c), lo, hi));
    breaks.push(hi);

    let mut roots = Vec::new();
    for w in breaks.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (horner(&c, a), horner(&c, b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = horner(&c, mid);
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if horner(&c, hi) == 0.0 {
        roots.push(hi);
    }
    roots
}

/// Runs the annealing schedule and returns a partial permutation.
///
/// `x0` defaults to the uniform barycenter.
pub fn solve<O: Objective + ?Sized>(
    obj: &O,
    cfg: &SolverConfig,
    x0: Option<SubStochasticMatrix>,
) -> Result<SolveResult> {
    cfg.validate()?;
    let dims = obj.dims();
    let mut x = match x0 {
        Some(x) => {
            if x.dims() != dims {
                return Err(Error::dim(format!(
                    "starting point is {:?}, objective expects {:?}",
                    x.dims().shape(),
                    dims.shape()
                )));
            }
            if !is_feasible(&x, DEFAULT_TOL_FEAS) {
                return Err(Error::Infeasible("starting point is not in the polytope".into()));
            }
            x
        }
        None => uniform_barycenter(dims),
    };

    let (start, end, end_inclusive) = cfg.schedule(obj.convexity());
    let mut trace = SolveTrace::default();
    let mut terminated_at = start;

    for step in 0u64.. {
        if is_discrete(&x, cfg.delta_discrete) {
            break;
        }
        let mut zeta = start - step as f64 * cfg.d_zeta;
        if zeta <= end {
            if !end_inclusive || trace.records.last().is_some_and(|r| r.zeta <= end) {
                break;
            }
            zeta = end;
        }
        terminated_at = zeta;
        let record = frank_wolfe(obj, cfg, zeta, &mut x)?;
        trace.records.push(record);
        if zeta <= end {
            break;
        }
    }

    let reached_vertex = is_discrete(&x, cfg.delta_discrete);
    let solution = round_to_permutation(&x);
    let final_objective = obj.value(to_matrix(&solution).view());
    if !final_objective.is_finite() {
        return Err(Error::NonFinite {
            what: "objective at the solution",
            zeta: terminated_at,
        });
    }
    Ok(SolveResult {
        solution,
        final_objective,
        terminated_at_zeta: terminated_at,
        reached_vertex,
        relaxed: x,
        trace,
    })
}

fn frank_wolfe<O: Objective + ?Sized>(
    obj: &O,
    cfg: &SolverConfig,
    zeta: f64,
    x: &mut SubStochasticMatrix,
) -> Result<ZetaRecord> {
    let weight = zeta_weight(zeta)?;
    let mut f = blended_value(obj, x.view(), weight, zeta);
    if !f.is_finite() {
        return Err(Error::NonFinite { what: "objective", zeta });
    }
    let mut fw_values = vec![f];
    let mut gap = 0.0;
    let mut iterations = 0;

    while iterations < cfg.max_fw_iters {
        let grad = blended_gradient(obj, x.view(), weight, zeta);
        if grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "gradient", zeta });
        }
        let vertex = to_matrix(&fw_direction(grad.view())?);
        gap = frobenius_inner(&grad.view(), &vertex.view(), &x.view());
        if converged(gap, f, cfg.epsilon, cfg.abs_gap_floor) {
            break;
        }
        let (alpha, f_next) = Segment::new(obj, x, &vertex, weight, zeta).search(f, gap, cfg.line_search);
        if !f_next.is_finite() {
            return Err(Error::NonFinite { what: "objective", zeta });
        }
        if alpha == 0.0 {
            break;
        }
        *x = x.step_towards(&vertex, alpha);
        f = f_next;
        fw_values.push(f);
        iterations += 1;
        debug_assert!(is_feasible(x, DEFAULT_TOL_FEAS), "iterate left the polytope at zeta {zeta}");
    }

    Ok(ZetaRecord {
        zeta,
        objective_value: f,
        gap,
        fw_iterations: iterations,
        fw_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_space::Dims;
    use crate::objectives::{GraphPair, QapInstance, QuadraticAssignment, SubgraphMatching};
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_feasible(rng: &mut ChaCha8Rng, m: usize, n: usize) -> SubStochasticMatrix {
        // Convex combination of random partial permutations.
        let mut acc = Array2::<f64>::zeros((m, n));
        let mut total = 0.0;
        for _ in 0..4 {
            let w: f64 = rng.gen_range(0.1..1.0);
            let mut cols: Vec<usize> = (0..n).collect();
            for i in 0..m {
                let k = rng.gen_range(i..n);
                cols.swap(i, k);
                acc[[i, cols[i]]] += w;
            }
            total += w;
        }
        acc /= total;
        SubStochasticMatrix::new(acc, 1e-12).unwrap()
    }

    fn random_qap(rng: &mut ChaCha8Rng, n: usize) -> QuadraticAssignment {
        let a = Array2::from_shape_fn((n, n), |_| rng.gen_range(0.0..10.0));
        let b = Array2::from_shape_fn((n, n), |_| rng.gen_range(0.0..10.0));
        QuadraticAssignment::new(QapInstance::new(a, b).unwrap())
    }

    #[test]
    fn combined_value_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_qap(&mut rng, 4);
        let x = random_feasible(&mut rng, 4, 4);
        assert_eq!(combined_value(&q, &x, 0.0).unwrap(), q.value(x.view()));

        let g = GraphPair::new(Array2::ones((2, 2)), Array2::ones((4, 4))).unwrap();
        let s = SubgraphMatching::new(g);
        let bary = uniform_barycenter(Dims::new(2, 4).unwrap());
        assert!((combined_value(&s, &bary, 1.0).unwrap() - 0.5).abs() < 1e-15);

        let id = SubStochasticMatrix::new(Array2::eye(3), 0.0).unwrap();
        let q3 = random_qap(&mut rng, 3);
        assert_eq!(combined_value(&q3, &id, -1.0).unwrap(), -3.0);
        assert!(matches!(combined_value(&q3, &id, 1.5), Err(Error::ZetaOutOfRange(_))));
        assert!(combined_gradient(&q3, &id, -1.01).is_err());
    }

    #[test]
    fn combined_gradient_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = random_qap(&mut rng, 4);
        let x = random_feasible(&mut rng, 4, 4);
        let g1 = combined_gradient(&q, &x, 1.0).unwrap();
        assert_eq!(g1, x.as_array() * 2.0);
        assert_eq!(combined_gradient(&q, &x, 0.0).unwrap(), q.gradient(x.view()));
        let gh = combined_gradient(&q, &x, -0.5).unwrap();
        let expect = q.gradient(x.view()) * 0.5 - x.as_array();
        for (a, b) in gh.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fw_direction_examples() {
        assert_eq!(fw_direction(array![[0.0, 1.0], [1.0, 0.0]].view()).unwrap().as_slice(), &[0, 1]);
        let g = Array2::from_elem((2, 3), 2.0 / 3.0);
        let p = fw_direction(g.view()).unwrap();
        let cost: f64 = p.as_slice().iter().enumerate().map(|(i, &j)| g[[i, j]]).sum();
        assert!((cost - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn converged_examples() {
        assert!(converged(0.0, 5.0, 1e-3, 1e-12));
        assert!(!converged(-1.0, 1.0, 1e-3, 1e-12));
        assert!(converged(-1e-15, 0.0, 1e-3, 1e-12));
        assert!(converged(-1e-4, 1.0, 1e-3, 1e-12));
        assert!(!converged(-1e-2, 1.0, 1e-3, 1e-12));
    }

    #[test]
    fn line_search_zero_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_qap(&mut rng, 3);
        let x = random_feasible(&mut rng, 3, 3);
        for mode in [LineSearch::ExactPolynomial, LineSearch::Backtracking] {
            let a = line_search(&q, 0.3, &x, &x, mode).unwrap();
            assert!((0.0..=1.0).contains(&a));
        }
    }

    /// Minimizes `phi` over a 1e-4 grid.
    fn grid_min(phi: impl Fn(f64) -> f64) -> (f64, f64) {
        (0..=10_000)
            .map(|k| k as f64 * 1e-4)
            .map(|a| (a, phi(a)))
            .fold((0.0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    #[test]
    fn exact_line_search_matches_grid_on_quadratics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..40 {
            let q = random_qap(&mut rng, 4);
            let x = random_feasible(&mut rng, 4, 4);
            let y = random_feasible(&mut rng, 4, 4);
            let zeta = rng.gen_range(-1.0..1.0);
            let phi = |a: f64| combined_value(&q, &x.step_towards(&y, a), zeta).unwrap();
            let alpha = line_search(&q, zeta, &x, &y, LineSearch::ExactPolynomial).unwrap();
            let (_, grid_best) = grid_min(phi);
            let scale = 1.0 + grid_best.abs();
            assert!(phi(alpha) <= grid_best + 1e-9 * scale, "trial {trial}");
            assert!(phi(alpha) <= phi(0.0) + 1e-12 * scale);
        }
    }

    #[test]
    fn exact_line_search_closed_form_quadratic() {
        // phi(a) = a2 a^2 + a1 a with a2 > 0 has minimizer clamp(-a1 / 2a2).
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let q = random_qap(&mut rng, 3);
            let x = random_feasible(&mut rng, 3, 3);
            let y = random_feasible(&mut rng, 3, 3);
            let zeta = 0.5;
            let phi = |a: f64| combined_value(&q, &x.step_towards(&y, a), zeta).unwrap();
            let c0 = phi(0.0);
            let (p1, p2) = (phi(1.0) - c0, phi(2.0) - c0);
            let a2 = (p2 - 2.0 * p1) / 2.0;
            let a1 = p1 - a2;
            if a2 <= 0.0 || a1 >= 0.0 {
                continue;
            }
            let expected = (-a1 / (2.0 * a2)).clamp(0.0, 1.0);
            let alpha = line_search(&q, zeta, &x, &y, LineSearch::ExactPolynomial).unwrap();
            assert!((alpha - expected).abs() < 1e-6, "{alpha} vs {expected}");
        }
    }

    #[test]
    fn exact_line_search_beats_grid_on_quartic_sgm() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for trial in 0..30 {
            let a_m = Array2::from_shape_fn((3, 3), |_| rng.gen_range(0.0..2.0));
            let a_d = Array2::from_shape_fn((5, 5), |_| rng.gen_range(0.0..2.0));
            let s = SubgraphMatching::new(GraphPair::new(a_m, a_d).unwrap());
            let x = random_feasible(&mut rng, 3, 5);
            let y = random_feasible(&mut rng, 3, 5);
            let zeta = rng.gen_range(-1.0..1.0);
            let phi = |a: f64| combined_value(&s, &x.step_towards(&y, a), zeta).unwrap();
            let alpha = line_search(&s, zeta, &x, &y, LineSearch::ExactPolynomial).unwrap();
            let (_, grid_best) = grid_min(phi);
            assert!(phi(alpha) <= grid_best + 1e-9 * (1.0 + grid_best.abs()), "trial {trial}");
        }
    }

    #[test]
    fn backtracking_never_ascends() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let q = random_qap(&mut rng, 4);
            let x = random_feasible(&mut rng, 4, 4);
            let y = random_feasible(&mut rng, 4, 4);
            let zeta = rng.gen_range(-1.0..1.0);
            let alpha = line_search(&q, zeta, &x, &y, LineSearch::Backtracking).unwrap();
            let f0 = combined_value(&q, &x, zeta).unwrap();
            let f1 = combined_value(&q, &x.step_towards(&y, alpha), zeta).unwrap();
            assert!(f1 <= f0 + 1e-12 * (1.0 + f0.abs()));
        }
    }

    #[test]
    fn root_finder_on_known_cubic() {
        // (t - 0.2)(t - 0.5)(t - 0.9)
        let c = [-0.09, 0.73, -1.6, 1.0];
        let roots = real_roots_in(&c, 0.0, 1.0);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([0.2, 0.5, 0.9]) {
            assert!((r - e).abs() < 1e-12);
        }
        assert!(real_roots_in(&[1.0, 0.0, 1.0], 0.0, 1.0).is_empty());
    }

    #[test]
    fn zero_qap_is_solved_with_zero_cost() {
        let q = QuadraticAssignment::new(QapInstance::new(Array2::zeros((3, 3)), Array2::zeros((3, 3))).unwrap());
        let r = solve(&q, &SolverConfig::default(), None).unwrap();
        assert_eq!(r.final_objective, 0.0);
        assert_eq!(r.solution.dims(), Dims::square(3).unwrap());
    }

    #[test]
    fn n3_qap_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q = random_qap(&mut rng, 3);
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let best = perms
            .iter()
            .map(|p| q.instance().permutation_cost(p))
            .fold(f64::INFINITY, f64::min);
        let r = solve(&q, &SolverConfig::default(), None).unwrap();
        assert!((r.final_objective - best).abs() < 1e-9);
    }

    #[test]
    fn trace_is_strictly_decreasing_in_zeta() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = random_qap(&mut rng, 5);
        let cfg = SolverConfig { d_zeta: 0.01, ..SolverConfig::default() };
        let r = solve(&q, &cfg, None).unwrap();
        assert!(!r.trace.is_empty());
        for w in r.trace.records.windows(2) {
            assert!(w[1].zeta < w[0].zeta);
        }
        assert!(r.trace.records.last().unwrap().zeta >= -1.0);
        assert!(r.trace.max_block_increase() <= 1e-9 * (1.0 + r.final_objective.abs()));
        assert_eq!(r.final_objective, q.value(to_matrix(&r.solution).view()));
    }

    #[test]
    fn rejects_bad_config_and_start() {
        let q = QuadraticAssignment::new(QapInstance::new(Array2::eye(2), Array2::eye(2)).unwrap());
        let bad = SolverConfig { d_zeta: 0.0, ..SolverConfig::default() };
        assert!(matches!(solve(&q, &bad, None), Err(Error::Config(_))));
        let bad = SolverConfig { epsilon: -1.0, ..SolverConfig::default() };
        assert!(solve(&q, &bad, None).is_err());
        let wrong = uniform_barycenter(Dims::square(3).unwrap());
        assert!(solve(&q, &SolverConfig::default(), Some(wrong)).is_err());
    }

    struct Poisoned;
    impl Objective for Poisoned {
        fn dims(&self) -> Dims {
            Dims::square(2).unwrap()
        }
        fn value(&self, _: ArrayView2<'_, f64>) -> f64 {
            f64::NAN
        }
        fn gradient(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
            Array2::zeros(x.dim())
        }
    }

    #[test]
    fn non_finite_values_abort_with_zeta() {
        let err = solve(&Poisoned, &SolverConfig::default(), None).unwrap_err();
        assert!(err.is_numerical());
        assert!(matches!(err, Error::NonFinite { .. }));
    }
}
