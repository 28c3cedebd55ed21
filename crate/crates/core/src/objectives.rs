//! Concrete objectives: subgraph matching, equal-size graph matching and
//! the quadratic assignment problem, plus the adapters that pose a QAP as a
//! graph-matching problem.
//!
//! Every objective is a polynomial in the entries of `X`, which the solver's
//! exact line search exploits through [`Objective::polynomial_degree`].

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_space::{check_finite, Dims};

/// Curvature of an objective over the relaxed polytope. It decides where the
/// annealing schedule starts and ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convexity {
    #[default]
    General,
    Convex,
    Concave,
}

/// A smooth function over `m x n` matrices.
///
/// `value` and `gradient` are evaluated at arbitrary matrices of shape
/// `dims()`, not only at feasible points (finite-difference checks step
/// outside the polytope). Implementations may assume the shape is right.
pub trait Objective: Sync {
    fn dims(&self) -> Dims;

    fn value(&self, x: ArrayView2<'_, f64>) -> f64;

    fn gradient(&self, x: ArrayView2<'_, f64>) -> Array2<f64>;

    fn convexity(&self) -> Convexity {
        Convexity::General
    }

    /// Total degree when the objective is a polynomial in the entries of
    /// `X`. `None` disables the exact line search for this objective.
    fn polynomial_degree(&self) -> Option<usize> {
        None
    }

    /// Monomial coefficients `c` with `F(X + tD) = Σ c[k] tᵏ`, for objectives
    /// that can form them more cheaply than by sampling. The exact line
    /// search falls back to sampling when this returns `None`.
    fn restriction(&self, _x: ArrayView2<'_, f64>, _d: ArrayView2<'_, f64>) -> Option<Vec<f64>> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dims(&self) -> Dims {
        (**self).dims()
    }
    fn value(&self, x: ArrayView2<'_, f64>) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (**self).gradient(x)
    }
    fn convexity(&self) -> Convexity {
        (**self).convexity()
    }
    fn polynomial_degree(&self) -> Option<usize> {
        (**self).polynomial_degree()
    }
    fn restriction(&self, x: ArrayView2<'_, f64>, d: ArrayView2<'_, f64>) -> Option<Vec<f64>> {
        (**self).restriction(x, d)
    }
}

/// Model and data adjacency matrices. Neither needs to be symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPair {
    a_m: Array2<f64>,
    a_d: Array2<f64>,
}

impl GraphPair {
    pub fn new(a_m: Array2<f64>, a_d: Array2<f64>) -> Result<Self> {
        let (mr, mc) = a_m.dim();
        let (dr, dc) = a_d.dim();
        if mr != mc || dr != dc {
            return Err(Error::dim(format!(
                "adjacency matrices must be square, got {mr}x{mc} and {dr}x{dc}"
            )));
        }
        Dims::new(mr, dr)?;
        check_finite(&a_m.view())?;
        check_finite(&a_d.view())?;
        Ok(GraphPair { a_m, a_d })
    }

    pub fn model(&self) -> &Array2<f64> {
        &self.a_m
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.a_d
    }

    pub fn model_size(&self) -> usize {
        self.a_m.nrows()
    }

    pub fn data_size(&self) -> usize {
        self.a_d.nrows()
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.model_size(), self.data_size()).expect("validated at construction")
    }

    pub fn is_equal_size(&self) -> bool {
        self.model_size() == self.data_size()
    }
}

/// Flow matrix `a` and distance matrix `b` of a QAP without linear term.
#[derive(Debug, Clone, PartialEq)]
pub struct QapInstance {
    a: Array2<f64>,
    b: Array2<f64>,
}

impl QapInstance {
    pub fn new(a: Array2<f64>, b: Array2<f64>) -> Result<Self> {
        let (ar, ac) = a.dim();
        if ar != ac || a.dim() != b.dim() {
            return Err(Error::dim(format!(
                "QAP matrices must be square and equal-sized, got {:?} and {:?}",
                a.dim(),
                b.dim()
            )));
        }
        Dims::square(ar)?;
        check_finite(&a.view())?;
        check_finite(&b.view())?;
        Ok(QapInstance { a, b })
    }

    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn b(&self) -> &Array2<f64> {
        &self.b
    }

    pub fn size(&self) -> usize {
        self.a.nrows()
    }

    pub fn dims(&self) -> Dims {
        Dims::square(self.size()).expect("validated at construction")
    }

    /// `Σ_{i,j} a[i][j] · b[π(i)][π(j)]` for the permutation `π`.
    pub fn permutation_cost(&self, perm: &[usize]) -> f64 {
        let n = self.size();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += self.a[[i, j]] * self.b[[perm[i], perm[j]]];
            }
        }
        total
    }
}

fn check_shape(x: &ArrayView2<'_, f64>, dims: Dims) -> Result<()> {
    if x.dim() != dims.shape() {
        return Err(Error::dim(format!(
            "expected a {:?} matrix, got {:?}",
            dims.shape(),
            x.dim()
        )));
    }
    Ok(())
}

fn require_equal_size(g: &GraphPair) -> Result<()> {
    if !g.is_equal_size() {
        return Err(Error::dim(format!(
            "graph matching needs equal sizes, got {} and {}",
            g.model_size(),
            g.data_size()
        )));
    }
    Ok(())
}

fn frobenius_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

fn inner(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(p, q)| p * q).sum()
}

fn inner_view(a: &Array2<f64>, b: &ArrayView2<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(p, q)| p * q).sum()
}

fn sgm_restriction(g: &GraphPair, x: ArrayView2<'_, f64>, d: ArrayView2<'_, f64>) -> Vec<f64> {
    // R(t) = R0 − t P1 − t² P2 with P1 = D A Xᵀ + X A Dᵀ, P2 = D A Dᵀ.
    let xa = x.dot(&g.a_d);
    let da = d.dot(&g.a_d);
    let r0 = &g.a_m - &xa.dot(&x.t());
    let p1 = da.dot(&x.t()) + xa.dot(&d.t());
    let p2 = da.dot(&d.t());
    vec![
        frobenius_sq(&r0),
        -2.0 * inner(&r0, &p1),
        frobenius_sq(&p1) - 2.0 * inner(&r0, &p2),
        2.0 * inner(&p1, &p2),
        frobenius_sq(&p2),
    ]
}

fn gm_restriction(g: &GraphPair, x: ArrayView2<'_, f64>, d: ArrayView2<'_, f64>) -> Vec<f64> {
    let e0 = g.a_m.dot(&x) - x.dot(&g.a_d);
    let e1 = g.a_m.dot(&d) - d.dot(&g.a_d);
    vec![frobenius_sq(&e0), 2.0 * inner(&e0, &e1), frobenius_sq(&e1)]
}

fn qap_restriction(q: &QapInstance, x: ArrayView2<'_, f64>, d: ArrayView2<'_, f64>) -> Vec<f64> {
    let axbt = q.a.dot(&x).dot(&q.b.t());
    let adbt = q.a.dot(&d).dot(&q.b.t());
    vec![
        inner_view(&axbt, &x),
        inner_view(&axbt, &d) + inner_view(&adbt, &x),
        inner_view(&adbt, &d),
    ]
}

/// `‖A_M − X A_D Xᵀ‖²_F`.
pub fn sgm_value(g: &GraphPair, x: ArrayView2<'_, f64>) -> Result<f64> {
    check_shape(&x, g.dims())?;
    Ok(sgm_residual_sq(g, x))
}

pub fn sgm_gradient(g: &GraphPair, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_shape(&x, g.dims())?;
    Ok(sgm_grad(g, x))
}

/// `‖A_M X − X A_D‖²_F`; equals [`sgm_value`] on permutation matrices.
pub fn gm_value(g: &GraphPair, x: ArrayView2<'_, f64>) -> Result<f64> {
    require_equal_size(g)?;
    check_shape(&x, g.dims())?;
    Ok(gm_residual_sq(g, x))
}

pub fn gm_gradient(g: &GraphPair, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    require_equal_size(g)?;
    check_shape(&x, g.dims())?;
    Ok(gm_grad(g, x))
}

/// `tr(A X Bᵀ Xᵀ)`.
pub fn qap_value(q: &QapInstance, x: ArrayView2<'_, f64>) -> Result<f64> {
    check_shape(&x, q.dims())?;
    Ok(qap_trace(q, x))
}

/// `A X Bᵀ + Aᵀ X B`.
pub fn qap_gradient(q: &QapInstance, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_shape(&x, q.dims())?;
    Ok(qap_grad(q, x))
}

fn sgm_residual_sq(g: &GraphPair, x: ArrayView2<'_, f64>) -> f64 {
    let r = &g.a_m - &x.dot(&g.a_d).dot(&x.t());
    frobenius_sq(&r)
}

fn sgm_grad(g: &GraphPair, x: ArrayView2<'_, f64>) -> Array2<f64> {
    // With R = A_M − X A_D Xᵀ the gradient is −2 (R X A_Dᵀ + Rᵀ X A_D).
    let r = &g.a_m - &x.dot(&g.a_d).dot(&x.t());
    let mut grad = r.dot(&x).dot(&g.a_d.t());
    grad += &r.t().dot(&x).dot(&g.a_d);
    grad *= -2.0;
    grad
}

fn gm_residual_sq(g: &GraphPair, x: ArrayView2<'_, f64>) -> f64 {
    let e = g.a_m.dot(&x) - x.dot(&g.a_d);
    frobenius_sq(&e)
}

fn gm_grad(g: &GraphPair, x: ArrayView2<'_, f64>) -> Array2<f64> {
    // 2 (A_Mᵀ E − E A_Dᵀ) with E = A_M X − X A_D.
    let e = g.a_m.dot(&x) - x.dot(&g.a_d);
    let mut grad = g.a_m.t().dot(&e);
    grad -= &e.dot(&g.a_d.t());
    grad *= 2.0;
    grad
}

fn qap_trace(q: &QapInstance, x: ArrayView2<'_, f64>) -> f64 {
    // tr(A X Bᵀ Xᵀ) = Σ (A X Bᵀ) ∘ X
    let axbt = q.a.dot(&x).dot(&q.b.t());
    axbt.iter().zip(x.iter()).map(|(p, q)| p * q).sum()
}

fn qap_grad(q: &QapInstance, x: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut grad = q.a.dot(&x).dot(&q.b.t());
    grad += &q.a.t().dot(&x).dot(&q.b);
    grad
}

/// Subgraph matching: match every model node to a distinct data node.
#[derive(Debug, Clone)]
pub struct SubgraphMatching {
    graphs: GraphPair,
}

impl SubgraphMatching {
    pub fn new(graphs: GraphPair) -> Self {
        SubgraphMatching { graphs }
    }

    pub fn graphs(&self) -> &GraphPair {
        &self.graphs
    }
}

impl Objective for SubgraphMatching {
    fn dims(&self) -> Dims {
        self.graphs.dims()
    }
    fn value(&self, x: ArrayView2<'_, f64>) -> f64 {
        sgm_residual_sq(&self.graphs, x)
    }
    fn gradient(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        sgm_grad(&self.graphs, x)
    }
    fn polynomial_degree(&self) -> Option<usize> {
        Some(4)
    }
    fn restriction(&self, x: ArrayView2<'_, f64>, d: ArrayView2<'_, f64>) -> Option<Vec<f64>> {
        Some(sgm_restriction(&self.graphs, x, d))
    }
}

/// Equal-size graph matching with the convex relaxation `‖A_M X − X A_D‖²`.
#[derive(Debug, Clone)]
pub struct GraphMatching {
    graphs: GraphPair,
}

impl GraphMatching {
    pub fn new(graphs: GraphPair) -> Result<Self> {
        require_equal_size(&graphs)?;
        Ok(GraphMatching { graphs })
    }

    pub fn graphs(&self) -> &GraphPair {
        &self.graphs
    }
}

impl Objective for GraphMatching {
    fn dims(&self) -> Dims {
        self.graphs.dims()
    }
    fn value(&self, x: ArrayView2<'_, f64>) -> f64 {
        gm_residual_sq(&self.graphs, x)
    }
    fn gradient(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        gm_grad(&self.graphs, x)
    }
    fn convexity(&self) -> Convexity {
        Convexity::Convex
    }
    fn polynomial_degree(&self) -> Option<usize> {
        Some(2)
    }
    fn restriction(&self, x: ArrayView2<'_, f64>, d: ArrayView2<'_, f64>) -> Option<Vec<f64>> {
        Some(gm_restriction(&self.graphs, x, d))
    }
}

/// Quadratic assignment `tr(A X Bᵀ Xᵀ)`.
#[derive(Debug, Clone)]
pub struct QuadraticAssignment {
    instance: QapInstance,
}

impl QuadraticAssignment {
    pub fn new(instance: QapInstance) -> Self {
        QuadraticAssignment { instance }
    }

    pub fn instance(&self) -> &QapInstance {
        &self.instance
    }
}

impl Objective for QuadraticAssignment {
    fn dims(&self) -> Dims {
        self.instance.dims()
    }
    fn value(&self, x: ArrayView2<'_, f64>) -> f64 {
        qap_trace(&self.instance, x)
    }
    fn gradient(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        qap_grad(&self.instance, x)
    }
    fn polynomial_degree(&self) -> Option<usize> {
        Some(2)
    }
    fn restriction(&self, x: ArrayView2<'_, f64>, d: ArrayView2<'_, f64>) -> Option<Vec<f64>> {
        Some(qap_restriction(&self.instance, x, d))
    }
}

/// Poses a QAP as subgraph matching with `A_M = −Aᵀ`, `A_D = Bᵀ`.
///
/// On permutation matrices the matching objective equals
/// `2 · tr(A X Bᵀ Xᵀ)` plus a term that does not depend on the permutation,
/// so both problems share their minimizers.
pub fn qap_as_sgm(q: &QapInstance) -> GraphPair {
    adapter_pair(q)
}

/// Same mapping as [`qap_as_sgm`], meant for the equal-size objective.
pub fn qap_as_gm(q: &QapInstance) -> GraphPair {
    adapter_pair(q)
}

fn adapter_pair(q: &QapInstance) -> GraphPair {
    GraphPair {
        a_m: q.a.t().mapv(|v| -v),
        a_d: q.b.t().to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_space::{to_matrix, uniform_barycenter, PartialPermutation};
    use ndarray::array;

    fn perm(p: &[usize]) -> Array2<f64> {
        to_matrix(&PartialPermutation::new(p.to_vec(), p.len()).unwrap()).into_array()
    }

    #[test]
    fn sgm_zero_at_identity() {
        let a = array![[0.0, 2.0, 1.0], [2.0, 0.0, 0.5], [1.0, 0.5, 0.0]];
        let g = GraphPair::new(a.clone(), a).unwrap();
        assert_eq!(sgm_value(&g, Array2::eye(3).view()).unwrap(), 0.0);
    }

    #[test]
    fn sgm_two_into_three() {
        let g = GraphPair::new(
            array![[0.0, 1.0], [1.0, 0.0]],
            array![[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
        )
        .unwrap();
        let hit = to_matrix(&PartialPermutation::new(vec![0, 1], 3).unwrap());
        let miss = to_matrix(&PartialPermutation::new(vec![0, 2], 3).unwrap());
        assert_eq!(sgm_value(&g, hit.view()).unwrap(), 0.0);
        // Induced submatrix on {0, 2} is zero, so both unit entries remain.
        assert_eq!(sgm_value(&g, miss.view()).unwrap(), 2.0);
    }

    #[test]
    fn zero_graphs_have_zero_gradients() {
        let g = GraphPair::new(Array2::zeros((2, 2)), Array2::zeros((3, 3))).unwrap();
        let x = uniform_barycenter(g.dims());
        assert!(sgm_gradient(&g, x.view()).unwrap().iter().all(|&v| v == 0.0));

        let g = GraphPair::new(Array2::zeros((3, 3)), Array2::zeros((3, 3))).unwrap();
        let x = uniform_barycenter(g.dims());
        assert!(gm_gradient(&g, x.view()).unwrap().iter().all(|&v| v == 0.0));

        let q = QapInstance::new(Array2::zeros((3, 3)), Array2::eye(3)).unwrap();
        assert!(qap_gradient(&q, x.view()).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gm_rejects_unequal_sizes() {
        let g = GraphPair::new(Array2::zeros((2, 2)), Array2::zeros((3, 3))).unwrap();
        assert!(gm_value(&g, Array2::zeros((2, 3)).view()).is_err());
        assert!(GraphMatching::new(g).is_err());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let q = QapInstance::new(Array2::eye(2), Array2::eye(2)).unwrap();
        assert!(qap_value(&q, Array2::eye(3).view()).is_err());
        assert!(QapInstance::new(Array2::eye(2), Array2::eye(3)).is_err());
        assert!(GraphPair::new(Array2::zeros((3, 3)), Array2::zeros((2, 2))).is_err());
        assert!(GraphPair::new(Array2::zeros((2, 3)), Array2::zeros((3, 3))).is_err());
    }

    #[test]
    fn qap_small_values() {
        let q = QapInstance::new(Array2::eye(2), Array2::eye(2)).unwrap();
        assert_eq!(qap_value(&q, Array2::eye(2).view()).unwrap(), 2.0);

        let q = QapInstance::new(array![[0.0, 1.0], [0.0, 0.0]], array![[0.0, 3.0], [5.0, 0.0]])
            .unwrap();
        assert_eq!(qap_value(&q, perm(&[0, 1]).view()).unwrap(), 3.0);
        assert_eq!(qap_value(&q, perm(&[1, 0]).view()).unwrap(), 5.0);
        assert_eq!(q.permutation_cost(&[1, 0]), 5.0);
    }

    #[test]
    fn symmetric_qap_gradient_collapses() {
        let a = array![[1.0, 2.0, 0.0], [2.0, 0.0, 3.0], [0.0, 3.0, 1.0]];
        let b = array![[0.0, 1.0, 4.0], [1.0, 2.0, 1.0], [4.0, 1.0, 0.0]];
        let q = QapInstance::new(a.clone(), b.clone()).unwrap();
        let x = array![[0.2, 0.5, 0.3], [0.6, 0.1, 0.3], [0.2, 0.4, 0.4]];
        let g = qap_gradient(&q, x.view()).unwrap();
        let expect = a.dot(&x).dot(&b) * 2.0;
        for (u, v) in g.iter().zip(expect.iter()) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_adapter_ties_everywhere() {
        let q = QapInstance::new(Array2::zeros((3, 3)), Array2::zeros((3, 3))).unwrap();
        let g = qap_as_sgm(&q);
        assert!(g.model().iter().all(|&v| v == 0.0));
        assert!(g.data().iter().all(|&v| v == 0.0));
        for p in [[0, 1, 2], [2, 0, 1], [1, 2, 0]] {
            assert_eq!(sgm_value(&g, perm(&p).view()).unwrap(), 0.0);
            assert_eq!(gm_value(&qap_as_gm(&q), perm(&p).view()).unwrap(), 0.0);
        }
    }

    fn check_restriction(obj: &dyn Objective, x: &Array2<f64>, d: &Array2<f64>) {
        let c = obj.restriction(x.view(), d.view()).unwrap();
        for t in [0.0, 0.3, 0.7, 1.0, 1.9] {
            let direct = obj.value((x + &(d * t)).view());
            let poly: f64 = c.iter().enumerate().map(|(k, ck)| ck * t.powi(k as i32)).sum();
            assert!((direct - poly).abs() <= 1e-9 * (1.0 + direct.abs()), "{direct} vs {poly}");
        }
    }

    #[test]
    fn restrictions_match_direct_evaluation() {
        let a = array![[0.0, 1.5, 0.2], [0.3, 0.0, 2.0], [1.0, 0.7, 0.0]];
        let b = array![[0.0, 0.4, 1.1], [2.2, 0.0, 0.6], [0.9, 1.3, 0.0]];
        let x = array![[0.5, 0.3, 0.2], [0.1, 0.6, 0.3], [0.4, 0.1, 0.5]];
        let d = perm(&[2, 0, 1]) - &x;
        let q = QapInstance::new(a.clone(), b.clone()).unwrap();
        check_restriction(&QuadraticAssignment::new(q), &x, &d);
        let g = GraphPair::new(a.clone(), b).unwrap();
        check_restriction(&GraphMatching::new(g).unwrap(), &x, &d);

        let ad = array![[0.0, 1.0, 2.0, 0.5], [1.0, 0.0, 0.0, 3.0], [0.2, 0.0, 0.0, 4.0], [0.0, 3.0, 1.0, 0.0]];
        let g = GraphPair::new(a, ad).unwrap();
        let x = Array2::from_elem((3, 4), 0.25);
        let d = array![[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]] - &x;
        check_restriction(&SubgraphMatching::new(g), &x, &d);
    }
}
