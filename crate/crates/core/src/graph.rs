//! Undirected weighted graphs, their Laplacians, degree-weighted norms and the
//! closed-form L2 smoothers.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sparse::CsrMatrix;

/// Dense node-feature matrix, one row per node.
pub type Signal = Array2<f64>;

/// Above this node count dense factorizations give way to conjugate gradient.
pub const DENSE_SOLVE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    /// `None` means an unweighted (unit) edge.
    pub weight: Option<f64>,
}

impl Edge {
    pub fn new(i: usize, j: usize) -> Self {
        Edge { i, j, weight: None }
    }

    pub fn weighted(i: usize, j: usize, w: f64) -> Self {
        Edge { i, j, weight: Some(w) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    adjacency: CsrMatrix,
    degrees: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKind {
    Unnormalized,
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphNorm {
    /// Σ_i d_i Σ_j |M_ij|
    L1G,
    /// Σ_i d_i Σ_j M_ij², the squared graph L2 norm.
    L2GSquared,
    /// Σ_i d_i ‖M_i,:‖₂
    L21G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmootherMode {
    Exact,
    FirstOrder,
}

/// Builds an undirected graph on `n` nodes.
///
/// Both orientations of a pair name the same edge. Repeated unweighted
/// listings collapse to a single unit edge; explicit weights on repeated
/// listings are summed.
pub fn build_graph(edges: &[Edge], n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidInput("graph must have at least one node".into()));
    }
    // (explicit weight sum, listed without weight)
    let mut pairs: BTreeMap<(usize, usize), (f64, bool)> = BTreeMap::new();
    for e in edges {
        for idx in [e.i, e.j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, n });
            }
        }
        if e.i == e.j {
            return Err(Error::SelfLoop(e.i));
        }
        let key = (e.i.min(e.j), e.i.max(e.j));
        let slot = pairs.entry(key).or_insert((0.0, false));
        match e.weight {
            Some(w) if !(w > 0.0 && w.is_finite()) => {
                return Err(Error::InvalidInput(format!("edge ({}, {}) has non-positive weight {w}", e.i, e.j)));
            }
            Some(w) => slot.0 += w,
            None => slot.1 = true,
        }
    }
    let mut trip = Vec::with_capacity(2 * pairs.len());
    for (&(i, j), &(sum, unit)) in &pairs {
        let w = sum + if unit { 1.0 } else { 0.0 };
        trip.push((i, j, w));
        trip.push((j, i, w));
    }
    Ok(Graph::from_adjacency(CsrMatrix::from_triplets(n, n, &trip)))
}

impl Graph {
    fn from_adjacency(adjacency: CsrMatrix) -> Self {
        let degrees = adjacency.row_sums();
        Graph {
            n: adjacency.nrows(),
            adjacency,
            degrees,
        }
    }

    /// Unit-weight graph from index pairs.
    pub fn from_pairs(pairs: &[(usize, usize)], n: usize) -> Result<Self> {
        let edges: Vec<Edge> = pairs.iter().map(|&(i, j)| Edge::new(i, j)).collect();
        build_graph(&edges, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.nnz() / 2
    }

    /// Canonical edge list: `i < j`, lexicographically sorted.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for (j, w) in self.adjacency.row(i) {
                if i < j {
                    out.push(Edge::weighted(i, j, w));
                }
            }
        }
        out
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency.get(i, j) != 0.0
    }

    /// D^{-1/2} A D^{-1/2}; rows and columns of isolated nodes are zero.
    pub fn normalized_adjacency(&self) -> CsrMatrix {
        let inv_sqrt: Vec<f64> = self.degrees.iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
        let mut trip = Vec::with_capacity(self.adjacency.nnz());
        for i in 0..self.n {
            for (j, w) in self.adjacency.row(i) {
                trip.push((i, j, inv_sqrt[i] * w * inv_sqrt[j]));
            }
        }
        CsrMatrix::from_triplets(self.n, self.n, &trip)
    }

    pub fn degree_matrix(&self) -> CsrMatrix {
        let trip: Vec<_> = self.degrees.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        CsrMatrix::from_triplets(self.n, self.n, &trip)
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.degrees[i] == 0.0
    }
}

/// L = D − A, or L̃ = I − D^{-1/2} A D^{-1/2}.
///
/// Isolated nodes get a unit diagonal in the normalized Laplacian so that
/// its spectrum stays in [0, 2].
pub fn laplacian(g: &Graph, kind: LaplacianKind) -> CsrMatrix {
    match kind {
        LaplacianKind::Unnormalized => g.degree_matrix().linear_combination(1.0, g.adjacency(), -1.0),
        LaplacianKind::Normalized => CsrMatrix::identity(g.n()).linear_combination(1.0, &g.normalized_adjacency(), -1.0),
    }
}

pub fn graph_norm(m: &ArrayView2<f64>, degrees: &[f64], kind: GraphNorm) -> Result<f64> {
    if m.nrows() != degrees.len() {
        return Err(Error::dims("graph_norm", degrees.len(), m.nrows()));
    }
    let total = m
        .axis_iter(Axis(0))
        .zip(degrees)
        .map(|(row, &d)| {
            let inner = match kind {
                GraphNorm::L1G => row.iter().map(|v| v.abs()).sum::<f64>(),
                GraphNorm::L2GSquared => row.iter().map(|v| v * v).sum::<f64>(),
                GraphNorm::L21G => row.iter().map(|v| v * v).sum::<f64>().sqrt(),
            };
            d * inner
        })
        .sum();
    Ok(total)
}

pub const POWER_ITERATION_CAP: usize = 1000;

/// Upper estimate of the largest eigenvalue of a symmetric PSD operator.
///
/// Power iteration from a fixed, non-constant start vector (a constant start
/// lies in the kernel of any unnormalized Laplacian and of the normalized
/// Laplacian of a regular graph). The converged Rayleigh quotient is inflated
/// by `1 + tol`.
pub fn estimate_lambda_max(l: &CsrMatrix, tol: f64) -> Result<f64> {
    let n = l.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    let golden = 0.618_033_988_749_894_9;
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i as f64 + 1.0) * golden).fract()).collect();
    normalize(&mut v);
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATION_CAP {
        let mut w = l.mul_vec(&v);
        let rayleigh: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        let wnorm = normalize(&mut w);
        if wnorm == 0.0 {
            return Ok(0.0);
        }
        if (rayleigh - estimate).abs() <= tol * rayleigh.abs() {
            return Ok(rayleigh * (1.0 + tol));
        }
        estimate = rayleigh;
        v = w;
    }
    Err(Error::NotConverged {
        iterations: POWER_ITERATION_CAP,
        best: estimate,
    })
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// tr(Uᵀ L U).
pub fn dirichlet_energy(u: &ArrayView2<f64>, l: &CsrMatrix) -> Result<f64> {
    if u.nrows() != l.ncols() {
        return Err(Error::dims("dirichlet_energy", l.ncols(), u.nrows()));
    }
    let lu = l.mul_dense(u);
    Ok((&lu * u).sum())
}

/// Minimizer of tr(UᵀL̃U) + ‖U − X‖², exactly or by its first-order
/// approximation Ã X.
pub fn l2_smoother(x: &ArrayView2<f64>, g: &Graph, mode: SmootherMode) -> Result<Signal> {
    if x.nrows() != g.n() {
        return Err(Error::dims("l2_smoother", g.n(), x.nrows()));
    }
    match mode {
        SmootherMode::FirstOrder => Ok(g.normalized_adjacency().mul_dense(x)),
        SmootherMode::Exact => {
            let sys = CsrMatrix::identity(g.n()).linear_combination(1.0, &laplacian(g, LaplacianKind::Normalized), 1.0);
            solve_sparse_spd(&sys, x)
        }
    }
}

/// SPD solve against a sparse matrix: dense Cholesky up to
/// [`DENSE_SOLVE_LIMIT`] nodes, conjugate gradient beyond.
pub(crate) fn solve_sparse_spd(sys: &CsrMatrix, rhs: &ArrayView2<f64>) -> Result<Signal> {
    if sys.nrows() <= DENSE_SOLVE_LIMIT {
        linalg::cholesky_solve(&sys.to_dense().view(), rhs)
    } else {
        let cap = 10 * sys.nrows();
        linalg::conjugate_gradient(|v| sys.mul_dense(v), rhs, 1e-10, cap).map(|(x, _)| x)
    }
}
