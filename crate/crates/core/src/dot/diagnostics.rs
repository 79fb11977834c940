use std::fmt::Write as _;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use super::state::DotState;
use super::updates::{residual_blocks, PrimalResiduals};
use crate::error::{Error, Result};
use crate::framelet::{ChannelKey, Coefficients, FrameletSystem};
use crate::graph::{graph_norm, Graph, GraphNorm};
use crate::linalg;

fn l1(m: &ArrayView2<f64>) -> f64 {
    m.iter().map(|v| v.abs()).sum()
}

fn inner(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> f64 {
    (a * b).sum()
}

fn sparsity_term(blocks: &Coefficients, degrees: &[f64], cfg: &SolverConfig) -> Result<f64> {
    let mut total = 0.0;
    for (key, b) in blocks.iter() {
        let nu = cfg.nu_for(*key);
        if nu != 0.0 {
            total += nu * graph_norm(&b.view(), degrees, GraphNorm::L1G)?;
        }
    }
    Ok(total)
}

fn smooth_terms(state: &DotState, x: &ArrayView2<f64>, g: &Graph, cfg: &SolverConfig) -> Result<f64> {
    let degrees = g.degrees();
    let fidelity = graph_norm(&(&state.u - x).view(), degrees, GraphNorm::L2GSquared)?;
    Ok(l1(&state.z.view()) + cfg.lambda1 * graph_norm(&state.e.view(), degrees, GraphNorm::L21G)? + 0.5 * cfg.lambda2 * fidelity)
}

/// Objective with the framelet term evaluated on a precomputed 𝒲U.
pub(crate) fn objective_with(
    state: &DotState,
    x: &ArrayView2<f64>,
    g: &Graph,
    wu: Option<&Coefficients>,
    cfg: &SolverConfig,
) -> Result<f64> {
    let framelet = match wu {
        Some(wu) => sparsity_term(wu, g.degrees(), cfg)?,
        None => 0.0,
    };
    Ok(framelet + smooth_terms(state, x, g, cfg)?)
}

/// Σν‖𝒲U‖_{1,G} + ‖Z‖₁ + λ₁‖E‖_{2,1,G} + (λ₂/2)‖U − X‖²_{2,G}. Without a
/// framelet system the first term is dropped.
pub fn objective_value(state: &DotState, x: &ArrayView2<f64>, g: &Graph, sys: Option<&FrameletSystem>, cfg: &SolverConfig) -> Result<f64> {
    let wu = sys.map(|s| s.decompose(&state.u.view())).transpose()?;
    objective_with(state, x, g, wu.as_ref(), cfg)
}

pub(crate) fn lagrangian_with(
    state: &DotState,
    x: &ArrayView2<f64>,
    g: &Graph,
    wu: Option<&Coefficients>,
    cfg: &SolverConfig,
) -> Result<f64> {
    let [mu1, mu2, mu3, mu4] = state.mu;
    let c = residual_blocks(state, wu);
    let mut total = smooth_terms(state, x, g, cfg)?;
    if wu.is_some() {
        total += sparsity_term(&state.q, g.degrees(), cfg)?;
    }
    let sq = |m: &Array2<f64>| m.iter().map(|v| v * v).sum::<f64>();
    total += 0.5 * mu1 * sq(&c.c1) + inner(&state.lam1.view(), &c.c1.view());
    if let Some(c2) = &c.c2 {
        for (k, b) in c2.iter() {
            total += 0.5 * mu2 * sq(b) + inner(&state.lam2.get(*k).expect("multiplier keyed like Q").view(), &b.view());
        }
    }
    total += 0.5 * mu3 * c.c3.dot(&c.c3) + state.lam3.dot(&c.c3);
    total += 0.5 * mu4 * sq(&c.c4) + inner(&state.lam4.view(), &c.c4.view());
    Ok(total)
}

/// Augmented Lagrangian: the split objective (ν‖Q‖ in place of ν‖𝒲U‖)
/// plus the multiplier inner products and μ/2-weighted squared residuals.
pub fn lagrangian_value(state: &DotState, x: &ArrayView2<f64>, g: &Graph, sys: Option<&FrameletSystem>, cfg: &SolverConfig) -> Result<f64> {
    let wu = sys.map(|s| s.decompose(&state.u.view())).transpose()?;
    lagrangian_with(state, x, g, wu.as_ref(), cfg)
}

/// First-order optimality surrogates for the current iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub residuals: PrimalResiduals,
    /// max(‖Λ₄‖_∞ − 1, 0) over all entries.
    pub lambda4_excess: f64,
    /// The same excess restricted to off-diagonal entries.
    pub lambda4_offdiag_excess: f64,
    /// Per channel: max over entries of max(|Λ₂[i,j]| − ν·d_i, 0).
    pub lambda2_excess: Vec<(ChannelKey, f64)>,
    /// Max over rows of max(‖Λ₁[i,:]‖₂ − bound_i, 0), bound per E-threshold mode.
    pub lambda1_excess: f64,
    pub dual_max: f64,
    /// ‖Λ₁Uᵀ − Λ₃𝟙ᵀ − Λ₄‖_F, the Y-stationarity identity at consensus.
    pub stationarity: f64,
}

pub(crate) fn kkt_with(state: &DotState, g: &Graph, wu: Option<&Coefficients>, cfg: &SolverConfig) -> KktReport {
    let residuals = residual_blocks(state, wu).norms();
    let n = state.n();
    let mut l4_all = 0.0f64;
    let mut l4_off = 0.0f64;
    for ((i, j), &v) in state.lam4.indexed_iter() {
        let excess = (v.abs() - 1.0).max(0.0);
        l4_all = l4_all.max(excess);
        if i != j {
            l4_off = l4_off.max(excess);
        }
    }
    let degrees = g.degrees();
    let lambda2_excess: Vec<(ChannelKey, f64)> = if wu.is_some() {
        state
            .lam2
            .iter()
            .map(|(key, lam)| {
                let nu = cfg.nu_for(*key);
                let worst = lam
                    .axis_iter(Axis(0))
                    .zip(degrees)
                    .flat_map(|(row, &d)| row.iter().map(move |v| (v.abs() - nu * d).max(0.0)).collect::<Vec<_>>())
                    .fold(0.0, f64::max);
                (*key, worst)
            })
            .collect()
    } else {
        Vec::new()
    };
    let bounds = cfg.lambda1_row_bounds(degrees);
    let lambda1_excess = state
        .lam1
        .axis_iter(Axis(0))
        .zip(&bounds)
        .map(|(row, &b)| (row.dot(&row).sqrt() - b).max(0.0))
        .fold(0.0, f64::max);
    let dual_max = lambda2_excess
        .iter()
        .map(|(_, v)| *v)
        .chain([l4_all, lambda1_excess])
        .fold(0.0, f64::max);

    let mut stat = state.lam1.dot(&state.u.t()) - &state.lam4;
    for i in 0..n {
        let l3 = state.lam3[i];
        stat.row_mut(i).mapv_inplace(|v| v - l3);
    }
    KktReport {
        residuals,
        lambda4_excess: l4_all,
        lambda4_offdiag_excess: l4_off,
        lambda2_excess,
        lambda1_excess,
        dual_max,
        stationarity: linalg::frobenius(&stat.view()),
    }
}

pub fn kkt_residuals(state: &DotState, g: &Graph, sys: Option<&FrameletSystem>, cfg: &SolverConfig) -> Result<KktReport> {
    let wu = sys.map(|s| s.decompose(&state.u.view())).transpose()?;
    Ok(kkt_with(state, g, wu.as_ref(), cfg))
}

/// One trace row. Absent quantities stay `None` and serialize as empty cells.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub lagrangian: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub r3: Option<f64>,
    pub r4: Option<f64>,
    pub kkt_dual_max: Option<f64>,
    pub kkt_stationarity: Option<f64>,
    pub mu: [Option<f64>; 4],
}

pub const TRACE_COLUMNS: [&str; 13] = [
    "iter",
    "objective",
    "lagrangian",
    "r1",
    "r2",
    "r3",
    "r4",
    "kkt_dual_max",
    "kkt_stationarity",
    "mu1",
    "mu2",
    "mu3",
    "mu4",
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsTrace {
    pub records: Vec<IterationRecord>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn parse_cell(s: &str, line: usize, col: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Parse {
        location: format!("trace line {line}, column {col}"),
        message: format!("not a number: {s:?}"),
    })
}

impl DiagnosticsTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = TRACE_COLUMNS.join(",");
        out.push('\n');
        for r in &self.records {
            let cells = [
                r.iter.to_string(),
                cell(Some(r.objective)),
                cell(r.lagrangian),
                cell(r.r1),
                cell(r.r2),
                cell(r.r3),
                cell(r.r4),
                cell(r.kkt_dual_max),
                cell(r.kkt_stationarity),
                cell(r.mu[0]),
                cell(r.mu[1]),
                cell(r.mu[2]),
                cell(r.mu[3]),
            ];
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = lines.next().map(|(_, h)| h.trim()).unwrap_or("");
        if header != TRACE_COLUMNS.join(",") {
            return Err(Error::Parse {
                location: "trace header".into(),
                message: format!("unexpected columns {header:?}"),
            });
        }
        let mut records = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != TRACE_COLUMNS.len() {
                return Err(Error::Parse {
                    location: format!("trace line {}", idx + 1),
                    message: format!("expected {} fields, found {}", TRACE_COLUMNS.len(), f.len()),
                });
            }
            let p = |c: usize| parse_cell(f[c], idx + 1, TRACE_COLUMNS[c]);
            records.push(IterationRecord {
                iter: f[0].parse().map_err(|_| Error::Parse {
                    location: format!("trace line {}", idx + 1),
                    message: format!("bad iteration index {:?}", f[0]),
                })?,
                objective: p(1)?.ok_or_else(|| Error::Parse {
                    location: format!("trace line {}", idx + 1),
                    message: "objective is required".into(),
                })?,
                lagrangian: p(2)?,
                r1: p(3)?,
                r2: p(4)?,
                r3: p(5)?,
                r4: p(6)?,
                kkt_dual_max: p(7)?,
                kkt_stationarity: p(8)?,
                mu: [p(9)?, p(10)?, p(11)?, p(12)?],
            });
        }
        Ok(DiagnosticsTrace { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dot::state::init_state;
    use crate::framelet::build_framelet_system;
    use crate::graph::LaplacianKind;
    use ndarray::{array, Array1};

    fn zero_state(n: usize, d: usize) -> DotState {
        DotState {
            u: Array2::zeros((n, d)),
            z: Array2::zeros((n, n)),
            e: Array2::zeros((n, d)),
            y: Array2::zeros((n, n)),
            q: Coefficients::zeros(&[], n, d),
            lam1: Array2::zeros((n, d)),
            lam2: Coefficients::zeros(&[], n, d),
            lam3: Array1::zeros(n),
            lam4: Array2::zeros((n, n)),
            mu: [1.0; 4],
            iter: 0,
        }
    }

    #[test]
    fn objective_examples() {
        let g = Graph::from_pairs(&[(0, 1), (1, 2)], 3).unwrap();
        let sys = build_framelet_system(&g, LaplacianKind::Normalized, 2, 10).unwrap();
        let cfg = SolverConfig::default();
        let s = zero_state(3, 1);
        let x0 = Array2::<f64>::zeros((3, 1));
        assert_eq!(objective_value(&s, &x0.view(), &g, Some(&sys), &cfg).unwrap(), 0.0);

        let cfg0 = SolverConfig { nu0: 0.0, ..cfg };
        let mut s = zero_state(3, 1);
        s.u = array![[1.0], [1.0], [1.0]];
        let x = s.u.clone();
        assert_eq!(objective_value(&s, &x.view(), &g, Some(&sys), &cfg0).unwrap(), 0.0);
        s.z[[0, 1]] = 0.5;
        assert_eq!(objective_value(&s, &x.view(), &g, Some(&sys), &cfg0).unwrap(), 0.5);
    }

    #[test]
    fn lagrangian_equals_objective_when_feasible() {
        let g = Graph::from_pairs(&[(0, 1), (1, 2), (0, 2)], 3).unwrap();
        let sys = build_framelet_system(&g, LaplacianKind::Normalized, 2, 10).unwrap();
        let cfg = SolverConfig::default();
        let x = array![[1.0, 0.0], [0.5, 2.0], [-1.0, 1.0]];
        let mut s = init_state(&g, Some(&sys), &x.view(), &cfg).unwrap();
        s.lam1.fill(0.3);
        s.lam4.fill(-0.2);
        let obj = objective_value(&s, &x.view(), &g, Some(&sys), &cfg).unwrap();
        let lag = lagrangian_value(&s, &x.view(), &g, Some(&sys), &cfg).unwrap();
        assert!((obj - lag).abs() < 1e-12);
    }

    #[test]
    fn lagrangian_single_penalty_term() {
        let g = Graph::from_pairs(&[(0, 1)], 2).unwrap();
        let cfg = SolverConfig::default();
        let x = array![[1.0], [2.0]];
        let mut s = init_state(&g, None, &x.view(), &cfg).unwrap();
        s.mu[2] = 3.0;
        // only Y𝟙 − 𝟙 = [0.5, 0] is nonzero
        s.y[[0, 1]] = 1.5;
        s.z = s.y.clone();
        s.e = s.l0_apply(&s.u.view());
        let obj = objective_value(&s, &x.view(), &g, None, &cfg).unwrap();
        let lag = lagrangian_value(&s, &x.view(), &g, None, &cfg).unwrap();
        assert!((lag - obj - 0.5 * 3.0 * 0.25).abs() < 1e-14);
    }

    #[test]
    fn two_node_lagrangian_term_by_term() {
        let g = Graph::from_pairs(&[(0, 1)], 2).unwrap();
        let cfg = SolverConfig {
            lambda1: 0.7,
            lambda2: 2.0,
            ..SolverConfig::default()
        };
        let x = array![[1.0], [3.0]];
        let s = DotState {
            u: array![[0.5], [2.0]],
            z: array![[0.0, 0.4], [0.9, 0.0]],
            e: array![[0.1], [-0.2]],
            y: array![[0.1, 0.6], [0.8, 0.0]],
            q: Coefficients::zeros(&[], 2, 1),
            lam1: array![[0.2], [-0.1]],
            lam2: Coefficients::zeros(&[], 2, 1),
            lam3: array![0.3, -0.4],
            lam4: array![[0.5, -0.5], [0.25, 0.0]],
            mu: [1.5, 1.0, 2.0, 0.5],
            iter: 0,
        };
        // independent evaluation, degrees are both 1
        let obj = (0.4 + 0.9) + 0.7 * (0.1f64.abs() + 0.2) + 0.5 * 2.0 * ((0.5 - 1.0f64).powi(2) + (2.0 - 3.0f64).powi(2));
        // U − YU − E
        let c1 = [0.5 - (0.1 * 0.5 + 0.6 * 2.0) - 0.1, 2.0 - (0.8 * 0.5) - (-0.2)];
        let c3 = [0.1 + 0.6 - 1.0, 0.8 - 1.0];
        let c4 = [[0.1, 0.6 - 0.4], [0.8 - 0.9, 0.0]];
        let mut want = obj;
        want += 0.5 * 1.5 * (c1[0] * c1[0] + c1[1] * c1[1]) + 0.2 * c1[0] - 0.1 * c1[1];
        want += 0.5 * 2.0 * (c3[0] * c3[0] + c3[1] * c3[1]) + 0.3 * c3[0] - 0.4 * c3[1];
        let c4sq: f64 = c4.iter().flatten().map(|v| v * v).sum();
        want += 0.5 * 0.5 * c4sq + 0.5 * c4[0][0] - 0.5 * c4[0][1] + 0.25 * c4[1][0];
        let got = lagrangian_value(&s, &x.view(), &g, None, &cfg).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn kkt_zero_multipliers_and_lambda4_violation() {
        let g = Graph::from_pairs(&[(0, 1), (1, 2)], 3).unwrap();
        let sys = build_framelet_system(&g, LaplacianKind::Normalized, 1, 10).unwrap();
        let cfg = SolverConfig::default();
        let x = array![[1.0], [0.0], [2.0]];
        let mut s = init_state(&g, Some(&sys), &x.view(), &cfg).unwrap();
        let rep = kkt_residuals(&s, &g, Some(&sys), &cfg).unwrap();
        assert_eq!(rep.dual_max, 0.0);
        assert_eq!(rep.stationarity, 0.0);
        assert_eq!(rep.residuals.max(), 0.0);
        s.lam4 = array![[1.0, -1.0, 1.0], [-1.0, 1.0, 1.0], [1.0, 1.0, -1.0]] * 1.5;
        let rep = kkt_residuals(&s, &g, Some(&sys), &cfg).unwrap();
        assert!((rep.lambda4_excess - 0.5).abs() < 1e-15);
        assert!((rep.dual_max - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trace_csv_round_trip() {
        let t = DiagnosticsTrace {
            records: vec![
                IterationRecord {
                    iter: 1,
                    objective: 0.1 + 0.2,
                    lagrangian: Some(-3.5e-17),
                    r1: Some(1.0 / 3.0),
                    mu: [Some(1.1), None, Some(2.0), Some(1e6)],
                    ..IterationRecord::default()
                },
                IterationRecord {
                    iter: 2,
                    objective: 7.0,
                    ..IterationRecord::default()
                },
            ],
        };
        let csv = t.to_csv();
        assert!(csv.starts_with("iter,objective,lagrangian,r1,r2,r3,r4,kkt_dual_max,kkt_stationarity,mu1,mu2,mu3,mu4\n"));
        assert_eq!(DiagnosticsTrace::from_csv(&csv).unwrap(), t);
        assert!(DiagnosticsTrace::from_csv("a,b\n").is_err());
    }
}
