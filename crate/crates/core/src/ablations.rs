//! Reduced denoisers: framelet-only features, structure-only, and the
//! quadratic Laplacian smoother.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dot::{self, DiagnosticsTrace, IterationRecord, SolveOutput, SolverConfig};
use crate::error::{Error, Result};
use crate::framelet::{Coefficients, FrameletSystem};
use crate::graph::{dirichlet_energy, graph_norm, laplacian, solve_sparse_spd, Graph, GraphNorm, LaplacianKind, Signal};
use crate::linalg;
use crate::prox;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone)]
pub struct NodeAdmmOutput {
    pub u: Signal,
    pub q: Coefficients,
    pub lam2: Coefficients,
    pub trace: DiagnosticsTrace,
}

/// (D + μ₂I)U = rhs, row by row.
fn diagonal_solve(degrees: &[f64], mu2: f64, rhs: &Array2<f64>) -> Array2<f64> {
    let mut u = rhs.clone();
    for (mut row, &d) in u.rows_mut().into_iter().zip(degrees) {
        row.mapv_inplace(|v| v / (d + mu2));
    }
    u
}

fn node_rhs(
    sys: &FrameletSystem,
    degrees: &[f64],
    x: &ArrayView2<f64>,
    q: &Coefficients,
    lam2: &Coefficients,
    mu2: f64,
) -> Result<Array2<f64>> {
    let mut target = q.scaled(mu2);
    for (k, b) in target.iter_mut() {
        *b += lam2.get(*k).expect("multiplier keyed like Q");
    }
    let mut rhs = sys.reconstruct(&target)?;
    for ((mut row, xr), &d) in rhs.rows_mut().into_iter().zip(x.rows()).zip(degrees) {
        row.scaled_add(d, &xr);
    }
    Ok(rhs)
}

/// ν‖C‖_{1,G} + ½‖U − X‖²_{2,G} for coefficients `c`. The trace evaluates
/// it at C = 𝒲U.
pub fn node_objective(g: &Graph, u: &ArrayView2<f64>, x: &ArrayView2<f64>, c: &Coefficients, cfg: &SolverConfig) -> Result<f64> {
    let mut total = 0.5 * graph_norm(&(u - x).view(), g.degrees(), GraphNorm::L2GSquared)?;
    for (key, b) in c.iter() {
        total += cfg.nu_for(*key) * graph_norm(&b.view(), g.degrees(), GraphNorm::L1G)?;
    }
    Ok(total)
}

/// Framelet-sparse feature denoising by ADMM on the Q = 𝒲U splitting.
/// Uses ν, ρ, μ₂ (initial and cap) and `max_iter` from `cfg`.
pub fn node_admm_solve(g: &Graph, sys: &FrameletSystem, x: &ArrayView2<f64>, cfg: &SolverConfig) -> Result<NodeAdmmOutput> {
    cfg.validate()?;
    if x.nrows() != g.n() || sys.n() != g.n() {
        return Err(Error::dims("node_admm_solve", g.n(), x.nrows()));
    }
    let (n, d) = x.dim();
    let degrees = g.degrees();
    let mut u = x.to_owned();
    let mut q = sys.decompose(x)?;
    let mut lam2 = Coefficients::zeros(&sys.index_set(), n, d);
    let mut mu2 = cfg.mu_init[1];
    let mut trace = DiagnosticsTrace::default();
    for t in 1..=cfg.max_iter {
        let rhs = dot::at_iter(t, node_rhs(sys, degrees, x, &q, &lam2, mu2))?;
        u = diagonal_solve(degrees, mu2, &rhs);
        let wu = dot::at_iter(t, sys.decompose(&u.view()))?;
        q = wu.clone();
        for (key, b) in q.iter_mut() {
            b.scaled_add(-1.0 / mu2, lam2.get(*key).expect("multiplier keyed like Q"));
            let eta: Vec<f64> = degrees.iter().map(|dg| cfg.nu_for(*key) * dg / mu2).collect();
            *b = prox::shrink_by_row(&b.view(), &eta);
        }
        let mut r2 = 0.0f64;
        let mut dual = 0.0f64;
        for (key, lam) in lam2.iter_mut() {
            let resid = q.get(*key).expect("Q keyed by index set") - wu.get(*key).expect("analysis keyed by index set");
            r2 = r2.max(linalg::frobenius(&resid.view()));
            lam.scaled_add(mu2, &resid);
            let nu = cfg.nu_for(*key);
            for (row, &dg) in lam.rows().into_iter().zip(degrees) {
                for v in row {
                    dual = dual.max(v.abs() - nu * dg);
                }
            }
        }
        mu2 = (cfg.rho * mu2).min(cfg.mu_max[1]);
        trace.records.push(IterationRecord {
            iter: t,
            objective: dot::at_iter(t, node_objective(g, &u.view(), x, &wu, cfg))?,
            r2: Some(r2),
            kkt_dual_max: Some(dual.max(0.0)),
            mu: [None, Some(mu2), None, None],
            ..IterationRecord::default()
        });
    }
    Ok(NodeAdmmOutput { u, q, lam2, trace })
}

/// Structure-only denoising: the joint solver with every framelet block
/// removed.
pub fn edge_admm_solve(g: &Graph, x: &ArrayView2<f64>, cfg: &SolverConfig) -> Result<SolveOutput> {
    dot::run_admm(g, None, x, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TvMode {
    #[default]
    Exact,
    FirstOrder,
}

/// D + αL with unit rows for isolated nodes.
pub fn tv_system(g: &Graph, alpha: f64) -> CsrMatrix {
    let mut sys = g
        .degree_matrix()
        .linear_combination(1.0, &laplacian(g, LaplacianKind::Unnormalized), alpha);
    let isolated: Vec<(usize, usize, f64)> = (0..g.n()).filter(|&i| g.is_isolated(i)).map(|i| (i, i, 1.0)).collect();
    if !isolated.is_empty() {
        sys = sys.linear_combination(1.0, &CsrMatrix::from_triplets(g.n(), g.n(), &isolated), 1.0);
    }
    sys
}

/// D X with isolated rows carried through unchanged.
pub fn tv_rhs(g: &Graph, x: &ArrayView2<f64>) -> Array2<f64> {
    let mut rhs = x.to_owned();
    for (mut row, &d) in rhs.rows_mut().into_iter().zip(g.degrees()) {
        if d > 0.0 {
            row.mapv_inplace(|v| v * d);
        }
    }
    rhs
}

/// Minimizer of (α/2)tr(UᵀLU) + ½‖U − X‖²_{2,G} with the unnormalized
/// Laplacian, or its first-order approximation (I − αD⁻¹L)X.
pub fn tv_smooth(g: &Graph, x: &ArrayView2<f64>, alpha: f64, mode: TvMode) -> Result<Signal> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be nonnegative, got {alpha}")));
    }
    if x.nrows() != g.n() {
        return Err(Error::dims("tv_smooth", g.n(), x.nrows()));
    }
    match mode {
        TvMode::Exact => solve_sparse_spd(&tv_system(g, alpha), &tv_rhs(g, x).view()),
        TvMode::FirstOrder => {
            let lx = laplacian(g, LaplacianKind::Unnormalized).mul_dense(x);
            let mut u = x.to_owned();
            for ((mut row, lrow), &d) in u.rows_mut().into_iter().zip(lx.rows()).zip(g.degrees()) {
                if d > 0.0 {
                    row.scaled_add(-alpha / d, &lrow);
                }
            }
            Ok(u)
        }
    }
}

pub fn tv_objective(g: &Graph, u: &ArrayView2<f64>, x: &ArrayView2<f64>, alpha: f64) -> Result<f64> {
    let smooth = dirichlet_energy(u, &laplacian(g, LaplacianKind::Unnormalized))?;
    Ok(0.5 * alpha * smooth + 0.5 * graph_norm(&(u - x).view(), g.degrees(), GraphNorm::L2GSquared)?)
}
