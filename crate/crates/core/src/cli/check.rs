use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;
use ndarray::Array2;

use super::{denoise::RunSummary, Failure};
use crate::ablations::{node_objective, tv_smooth, tv_system, TvMode};
use crate::dot::{kkt_residuals, objective_value, DiagnosticsTrace, PrimalResiduals};
use crate::framelet::FrameletSystem;
use crate::graph::{build_graph, Graph, Signal};
use crate::io::{self, MatrixFormat};
use crate::linalg;
use crate::run::SolverKind;

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Directory written by `denoise`.
    pub run_dir: PathBuf,
    /// Largest accepted ‖𝒲ᵀ𝒲x − x‖/‖x‖ for the configured Chebyshev order.
    #[arg(long, default_value_t = 1e-6)]
    pub tight_tol: f64,
    /// Largest accepted multiplier-bound excess.
    #[arg(long, default_value_t = 1e-6)]
    pub dual_tol: f64,
    /// Relative tolerance when comparing recomputed values with the recorded ones.
    #[arg(long, default_value_t = 1e-9)]
    pub recompute_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Reported but does not affect the exit code.
    Info,
}

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckRow {
    fn new(name: &'static str, ok: bool, detail: String) -> Self {
        CheckRow {
            name,
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            detail,
        }
    }
}

struct RunDir {
    summary: RunSummary,
    trace: DiagnosticsTrace,
    graph: Graph,
    x: Signal,
    u: Signal,
    z: Option<Array2<f64>>,
}

fn load(dir: &Path) -> crate::Result<RunDir> {
    let summary: RunSummary = serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json"))?)?;
    let trace = DiagnosticsTrace::from_csv(&std::fs::read_to_string(dir.join("trace.csv"))?)?;
    let x = io::read_matrix(&dir.join("inputs").join("X.csv"), MatrixFormat::default())?;
    let graph = build_graph(&io::read_edge_list(&dir.join("inputs").join("graph.txt"))?, x.nrows())?;
    let u = io::read_matrix(&dir.join("U.csv"), MatrixFormat::default())?;
    let z = if summary.solver.learns_structure() {
        Some(io::read_matrix(&dir.join("Z.csv"), MatrixFormat::default())?)
    } else {
        None
    };
    Ok(RunDir {
        summary,
        trace,
        graph,
        x,
        u,
        z,
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-300 || a == b
}

fn trace_checks(run: &RunDir, rows: &mut Vec<CheckRow>) {
    let expected = match run.summary.solver {
        SolverKind::Tv => 1,
        _ => run.summary.config.solver.max_iter,
    };
    let iters_ok = run.trace.records.iter().enumerate().all(|(i, r)| r.iter == i + 1);
    rows.push(CheckRow::new(
        "trace_records",
        run.trace.len() == expected && iters_ok,
        format!("{} records, expected {expected}", run.trace.len()),
    ));

    let caps = run.summary.config.solver.mu_max;
    let mut violations = Vec::new();
    for (col, cap) in caps.into_iter().enumerate() {
        let values: Vec<(usize, f64)> = run.trace.records.iter().filter_map(|r| r.mu[col].map(|v| (r.iter, v))).collect();
        for w in values.windows(2) {
            if w[1].1 < w[0].1 {
                violations.push(format!("mu{} decreases at iter {}", col + 1, w[1].0));
            }
        }
        if let Some((it, v)) = values.iter().find(|(_, v)| *v > cap) {
            violations.push(format!("mu{} = {v} exceeds cap at iter {it}", col + 1));
        }
    }
    let detail = if violations.is_empty() {
        "non-decreasing and capped".to_string()
    } else {
        violations.join("; ")
    };
    rows.push(CheckRow::new("mu_monotone", violations.is_empty(), detail));
}

fn tightness_check(sys: &FrameletSystem, x: &Signal, tol: f64) -> crate::Result<CheckRow> {
    let c = sys.decompose(&x.view())?;
    let back = sys.reconstruct(&c)?;
    let norm = linalg::frobenius(&x.view());
    let defect = linalg::frobenius(&(&back - x).view()) / if norm > 0.0 { norm } else { 1.0 };
    Ok(CheckRow::new(
        "frame_tightness",
        defect <= tol,
        format!("relative defect {defect:.3e} at m = {} (tol {tol:.1e})", sys.cheb_order()),
    ))
}

fn residual_rows(recorded: Option<PrimalResiduals>, now: &PrimalResiduals, rel: f64, tol: f64, rows: &mut Vec<CheckRow>) {
    let Some(rec) = recorded else {
        rows.push(CheckRow::new("residuals_recomputed", false, "summary has no residuals".into()));
        return;
    };
    let pairs = [
        ("r1", rec.r1, now.r1),
        ("r2", rec.r2.unwrap_or(0.0), now.r2.unwrap_or(0.0)),
        ("r3", rec.r3, now.r3),
        ("r4", rec.r4, now.r4),
    ];
    let bad: Vec<String> = pairs
        .iter()
        .filter(|(_, a, b)| !close(*a, *b, rel))
        .map(|(n, a, b)| format!("{n}: recorded {a:.6e}, recomputed {b:.6e}"))
        .collect();
    let detail = if bad.is_empty() {
        format!("max residual {:.3e}", now.max())
    } else {
        bad.join("; ")
    };
    rows.push(CheckRow::new("residuals_recomputed", bad.is_empty(), detail));
    rows.push(CheckRow {
        name: "residual_tolerance",
        status: CheckStatus::Info,
        detail: format!(
            "max residual {:.3e} {} tol_residual {tol:.1e}",
            now.max(),
            if now.max() <= tol { "<=" } else { ">" }
        ),
    });
}

fn objective_row(recorded: Option<f64>, now: f64, rel: f64) -> CheckRow {
    match recorded {
        Some(rec) => CheckRow::new(
            "objective_recomputed",
            close(rec, now, rel),
            format!("recorded {rec:.10e}, recomputed {now:.10e}"),
        ),
        None => CheckRow::new("objective_recomputed", false, "trace is empty".into()),
    }
}

fn solver_checks(dir: &Path, run: &RunDir, args: &CheckArgs, rows: &mut Vec<CheckRow>) -> crate::Result<()> {
    let cfg = &run.summary.config;
    let g = &run.graph;
    let sys = if run.summary.solver.uses_framelets() {
        let sys = cfg.build_system(g)?;
        rows.push(tightness_check(&sys, &run.x, args.tight_tol)?);
        Some(sys)
    } else {
        None
    };
    let last_objective = run.trace.last().map(|r| r.objective);
    match run.summary.solver {
        SolverKind::Dot | SolverKind::EdgeAdmm => {
            let mut state = io::read_state(&dir.join("state"))?;
            state.u = run.u.clone();
            state.z = run.z.clone().expect("loaded for structure solvers");
            let kkt = kkt_residuals(&state, g, sys.as_ref(), &cfg.solver)?;
            if state.iter > 0 {
                residual_rows(
                    run.summary.residuals,
                    &kkt.residuals,
                    args.recompute_tol,
                    cfg.solver.tol_residual,
                    rows,
                );
                let obj = objective_value(&state, &run.x.view(), g, sys.as_ref(), &cfg.solver)?;
                rows.push(objective_row(last_objective, obj, args.recompute_tol));
            }
            rows.push(CheckRow::new(
                "dual_bounds",
                kkt.dual_max <= args.dual_tol,
                format!(
                    "max excess {:.3e} (Λ₄ {:.3e}, Λ₁ {:.3e}) tol {:.1e}",
                    kkt.dual_max, kkt.lambda4_excess, kkt.lambda1_excess, args.dual_tol
                ),
            ));
        }
        SolverKind::NodeAdmm => {
            let sys = sys.as_ref().expect("built for framelet solvers");
            if !run.trace.is_empty() {
                let wu = sys.decompose(&run.u.view())?;
                let obj = node_objective(g, &run.u.view(), &run.x.view(), &wu, &cfg.solver)?;
                rows.push(objective_row(last_objective, obj, args.recompute_tol));
            }
        }
        SolverKind::Tv => {
            let dx = Array2::from_shape_fn(run.x.dim(), |(i, j)| g.degrees()[i] * run.x[[i, j]]);
            let (ok, detail) = match cfg.tv_mode {
                TvMode::Exact => {
                    let resid = tv_system(g, cfg.alpha).mul_dense(&run.u.view()) - &dx;
                    let isolated: Vec<usize> = (0..g.n()).filter(|&i| g.is_isolated(i)).collect();
                    let pass_through = isolated.iter().all(|&i| run.u.row(i) == run.x.row(i));
                    let mut resid = resid;
                    for &i in &isolated {
                        resid.row_mut(i).fill(0.0);
                    }
                    let r = linalg::frobenius(&resid.view());
                    let bound = 1e-8 * linalg::frobenius(&dx.view());
                    (r <= bound && pass_through, format!("‖(D+αL)U − DX‖ = {r:.3e}, bound {bound:.3e}"))
                }
                TvMode::FirstOrder => {
                    let want = tv_smooth(g, &run.x.view(), cfg.alpha, TvMode::FirstOrder)?;
                    let diff = linalg::max_abs(&(&want - &run.u).view());
                    (diff <= 1e-12, format!("max deviation from (I − αD⁻¹L)X {diff:.3e}"))
                }
            };
            rows.push(CheckRow::new("tv_first_order", ok, detail));
        }
    }
    Ok(())
}

/// All checks for one run directory. I/O and parse errors surface as `Err`.
pub fn check_run(args: &CheckArgs) -> crate::Result<Vec<CheckRow>> {
    let run = load(&args.run_dir)?;
    let mut rows = Vec::new();
    trace_checks(&run, &mut rows);
    solver_checks(&args.run_dir, &run, args, &mut rows)?;
    Ok(rows)
}

pub(super) fn run(args: &CheckArgs) -> Result<ExitCode, Failure> {
    let rows = check_run(args).map_err(|e| Failure::Io(format!("{}: {e}", args.run_dir.display())))?;
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(5).max(5);
    println!("{:width$}  status  detail", "check");
    for r in &rows {
        let status = match r.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Info => "INFO",
        };
        println!("{:width$}  {status:6}  {}", r.name, r.detail);
    }
    let failed: Vec<&str> = rows.iter().filter(|r| r.status == CheckStatus::Fail).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failed: {}", failed.join(", "));
        Ok(ExitCode::from(1))
    }
}
