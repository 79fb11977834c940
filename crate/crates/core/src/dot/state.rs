use ndarray::{Array1, Array2, ArrayView2};

use super::config::{SolverConfig, DENSE_STRUCTURE_LIMIT};
use crate::error::{Error, Result};
use crate::framelet::{Coefficients, FrameletSystem};
use crate::graph::{Graph, Signal};

/// Primal blocks, multipliers and penalties of one ADMM run.
///
/// Solvers without a framelet term keep `q` and `lam2` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct DotState {
    pub u: Signal,
    pub z: Array2<f64>,
    pub e: Array2<f64>,
    pub y: Array2<f64>,
    pub q: Coefficients,
    pub lam1: Array2<f64>,
    pub lam2: Coefficients,
    pub lam3: Array1<f64>,
    pub lam4: Array2<f64>,
    pub mu: [f64; 4],
    pub iter: usize,
}

impl DotState {
    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    /// I − Y applied to `v`.
    pub fn l0_apply(&self, v: &ArrayView2<f64>) -> Array2<f64> {
        &v.to_owned() - &self.y.dot(v)
    }

    /// (I − Y)ᵀ applied to `v`.
    pub fn l0t_apply(&self, v: &ArrayView2<f64>) -> Array2<f64> {
        &v.to_owned() - &self.y.t().dot(v)
    }
}

/// D⁻¹A with isolated rows spread evenly over the other nodes, so every row
/// sums to one (except on a single-node graph).
pub fn row_normalized_adjacency(g: &Graph) -> Array2<f64> {
    let n = g.n();
    let mut y = Array2::zeros((n, n));
    for i in 0..n {
        let d = g.degrees()[i];
        if d > 0.0 {
            for (j, w) in g.adjacency().row(i) {
                y[[i, j]] = w / d;
            }
        } else if n > 1 {
            let share = 1.0 / (n - 1) as f64;
            for j in (0..n).filter(|&j| j != i) {
                y[[i, j]] = share;
            }
        }
    }
    y
}

pub(crate) fn check_structure_size(n: usize) -> Result<()> {
    if n > DENSE_STRUCTURE_LIMIT {
        return Err(Error::InvalidInput(format!(
            "structure denoising keeps dense {n}x{n} blocks; the limit is {DENSE_STRUCTURE_LIMIT} nodes"
        )));
    }
    Ok(())
}

pub(crate) fn check_signal(g: &Graph, x: &ArrayView2<f64>) -> Result<()> {
    if x.nrows() != g.n() {
        return Err(Error::dims("feature rows vs graph nodes", g.n(), x.nrows()));
    }
    if x.ncols() == 0 {
        return Err(Error::InvalidInput("feature matrix needs at least one column".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("feature matrix contains non-finite values".into()));
    }
    Ok(())
}

/// U = X, Y = Z = row-normalized adjacency, E = U − YU, Q = 𝒲U, zero
/// multipliers and μ at their initial values. `sys = None` leaves the
/// framelet blocks empty.
pub fn init_state(g: &Graph, sys: Option<&FrameletSystem>, x: &ArrayView2<f64>, cfg: &SolverConfig) -> Result<DotState> {
    check_signal(g, x)?;
    check_structure_size(g.n())?;
    let (n, d) = x.dim();
    let y = row_normalized_adjacency(g);
    let u = x.to_owned();
    let e = &u - &y.dot(&u);
    let (q, lam2) = match sys {
        Some(sys) => {
            if sys.n() != n {
                return Err(Error::dims("framelet system size", n, sys.n()));
            }
            (sys.decompose(x)?, Coefficients::zeros(&sys.index_set(), n, d))
        }
        None => (Coefficients::zeros(&[], n, d), Coefficients::zeros(&[], n, d)),
    };
    Ok(DotState {
        z: y.clone(),
        y,
        e,
        u,
        q,
        lam1: Array2::zeros((n, d)),
        lam2,
        lam3: Array1::zeros(n),
        lam4: Array2::zeros((n, n)),
        mu: cfg.mu_init,
        iter: 0,
    })
}
