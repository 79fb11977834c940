//! Joint feature and structure denoiser: framelet-sparse features, a sparse
//! self-expressive structure matrix and a row-sparse residual, solved by
//! ADMM with adaptive penalties.

mod config;
mod diagnostics;
mod state;
mod updates;

use ndarray::{Array2, ArrayView2};

pub use config::{ChannelWeight, EThreshold, SolverConfig, SweepOrder, USolve, YDiagonal, CG_TOL, DENSE_STRUCTURE_LIMIT};
pub use diagnostics::{kkt_residuals, lagrangian_value, objective_value, DiagnosticsTrace, IterationRecord, KktReport, TRACE_COLUMNS};
pub use state::{init_state, row_normalized_adjacency, DotState};
pub use updates::{
    primal_residuals, u_system, update_e, update_multipliers_penalties, update_q, update_u, update_y, update_z, woodbury_inverse, y_rhs,
    PrimalResiduals, USystem,
};

pub(crate) use diagnostics::{kkt_with, lagrangian_with, objective_with};

use crate::error::{Error, Result};
use crate::framelet::{Coefficients, FrameletSystem};
use crate::graph::{Graph, Signal};

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub u: Signal,
    pub z: Array2<f64>,
    pub trace: DiagnosticsTrace,
    pub state: DotState,
}

pub(crate) fn at_iter<T>(iter: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::AtIteration { iter, source: Box::new(e) })
}

/// One sweep over the primal blocks in `cfg.sweep_order`, with or without
/// the framelet term. Returns 𝒲U for the new U when a system is given.
pub(crate) fn primal_sweep(
    state: &mut DotState,
    g: &Graph,
    sys: Option<&FrameletSystem>,
    x: &ArrayView2<f64>,
    cfg: &SolverConfig,
) -> Result<Option<Coefficients>> {
    let (system, rhs) = u_system(state, g, sys, x, cfg)?;
    state.u = system.solve(&rhs.view(), cfg.u_solve)?;
    match cfg.sweep_order {
        SweepOrder::ProxConsistent => {
            state.y = update_y(state, cfg)?;
            state.z = update_z(state);
            state.e = update_e(state, g, cfg)?;
        }
        SweepOrder::Listed => {
            state.z = update_z(state);
            state.e = update_e(state, g, cfg)?;
            state.y = update_y(state, cfg)?;
        }
    }
    match sys {
        Some(sys) => {
            let wu = sys.decompose(&state.u.view())?;
            state.q = updates::q_from_analysis(&wu, &state.lam2, g.degrees(), state.mu[1], cfg);
            Ok(Some(wu))
        }
        None => Ok(None),
    }
}

/// Full sweep plus dual ascent, returning the trace row for this iteration.
pub(crate) fn admm_iteration(
    state: &mut DotState,
    g: &Graph,
    sys: Option<&FrameletSystem>,
    x: &ArrayView2<f64>,
    cfg: &SolverConfig,
) -> Result<IterationRecord> {
    let wu = primal_sweep(state, g, sys, x, cfg)?;
    let objective = objective_with(state, x, g, wu.as_ref(), cfg)?;
    let res = update_multipliers_penalties(state, wu.as_ref(), cfg);
    state.iter += 1;
    let lagrangian = lagrangian_with(state, x, g, wu.as_ref(), cfg)?;
    let kkt = kkt_with(state, g, wu.as_ref(), cfg);
    Ok(IterationRecord {
        iter: state.iter,
        objective,
        lagrangian: Some(lagrangian),
        r1: Some(res.r1),
        r2: res.r2,
        r3: Some(res.r3),
        r4: Some(res.r4),
        kkt_dual_max: Some(kkt.dual_max),
        kkt_stationarity: Some(kkt.stationarity),
        mu: state.mu.map(Some),
    })
}

pub(crate) fn run_admm(g: &Graph, sys: Option<&FrameletSystem>, x: &ArrayView2<f64>, cfg: &SolverConfig) -> Result<SolveOutput> {
    cfg.validate()?;
    let mut state = init_state(g, sys, x, cfg)?;
    let mut trace = DiagnosticsTrace::default();
    for t in 1..=cfg.max_iter {
        let record = at_iter(t, admm_iteration(&mut state, g, sys, x, cfg))?;
        trace.records.push(record);
    }
    Ok(SolveOutput {
        u: state.u.clone(),
        z: state.z.clone(),
        trace,
        state,
    })
}

/// Runs `cfg.max_iter` ADMM sweeps from [`init_state`].
pub fn solve(g: &Graph, sys: &FrameletSystem, x: &ArrayView2<f64>, cfg: &SolverConfig) -> Result<SolveOutput> {
    run_admm(g, Some(sys), x, cfg)
}
