//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use dot_denoise::ablations::{edge_admm_solve, node_admm_solve, tv_smooth, tv_system, TvMode};
use dot_denoise::dot::{self, kkt_residuals, u_system, update_y, y_rhs, SolverConfig, USolve, YDiagonal};
use dot_denoise::framelet::{haar_filter_bank, ExactFramelet, FrameletConfig, FrameletSystem};
use dot_denoise::graph::{Graph, LaplacianKind, Signal};
use dot_denoise::io;
use dot_denoise::linalg;
use dot_denoise::perturb::{recovery_metrics, sbm_generate, seeded_rng, Scenario, ScenarioInstance};
use dot_denoise::prox;
use dot_denoise::run::{reference_config, RunConfig};
use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Improvement ratios of the seeded hybrid-noise scenario under
/// [`reference_config`], frozen after the first verified run.
const GOLDEN_DOT_RATIO: f64 = 0.7540694008477762;
const GOLDEN_NODE_RATIO: f64 = 0.7333986698332489;
const GOLDEN_TOL: f64 = 1e-9;

type Verdict = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_signal(rng: &mut impl Rng, n: usize, d: usize) -> Signal {
    Array2::from_shape_fn((n, d), |_| StandardNormal.sample(rng))
}

/// Erdős–Rényi graphs with 5 to 30 nodes, isolated nodes allowed.
fn random_graphs(seed: u64, count: usize) -> Vec<(Graph, Signal)> {
    let mut rng = seeded_rng(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(5..=30);
            let p = rng.random_range(0.05..0.5);
            let g = sbm_generate(&[n], p, 0.0, &mut rng).unwrap();
            let x = random_signal(&mut rng, n, 3);
            (g, x)
        })
        .collect()
}

fn tight_frame_identity() -> Verdict {
    let mut worst = 0.0f64;
    for (i, (g, x)) in random_graphs(101, 20).into_iter().enumerate() {
        for kind in [LaplacianKind::Normalized, LaplacianKind::Unnormalized] {
            let cfg = FrameletConfig {
                levels: 1 + i % 3,
                laplacian: kind,
                ..FrameletConfig::default()
            };
            let exact = ExactFramelet::new(&g, &cfg, &haar_filter_bank()).map_err(|e| e.to_string())?;
            let back = exact.reconstruct(&exact.decompose(&x.view()).unwrap()).unwrap();
            worst = worst.max(linalg::frobenius(&(&back - &x).view()) / linalg::frobenius(&x.view()));
        }
    }
    check(
        worst <= 1e-10,
        format!("worst relative defect {worst:.2e} over 20 graphs x 2 Laplacians (tol 1e-10)"),
    )
}

fn chebyshev_fidelity() -> Verdict {
    const ORDERS: [usize; 4] = [5, 10, 20, 40];
    let mut worst_at_40 = 0.0f64;
    let mut violations = Vec::new();
    for (i, (g, x)) in random_graphs(202, 20).into_iter().enumerate() {
        let levels = 1 + i % 3;
        // below this the error is round-off and carries no ordering
        let floor = 1e3 * f64::EPSILON * linalg::max_abs(&x.view());
        let mut errs = Vec::new();
        for m in ORDERS {
            let cfg = FrameletConfig {
                levels,
                cheb_order: m,
                ..FrameletConfig::default()
            };
            let sys = FrameletSystem::new(&g, &cfg, haar_filter_bank()).unwrap();
            let exact = ExactFramelet::from_system(&sys).unwrap();
            let approx = sys.decompose(&x.view()).unwrap();
            errs.push(approx.max_abs_diff(&exact.decompose(&x.view()).unwrap()).unwrap());
        }
        for k in 1..errs.len() {
            if errs[k] > errs[k - 1].max(floor) {
                violations.push(format!(
                    "graph {i}: m={} {:.2e} > m={} {:.2e}",
                    ORDERS[k],
                    errs[k],
                    ORDERS[k - 1],
                    errs[k - 1]
                ));
            }
        }
        worst_at_40 = worst_at_40.max(errs[3]);
    }
    if !violations.is_empty() {
        return Err(format!("error increased with m: {}", violations.join("; ")));
    }
    check(
        worst_at_40 <= 1e-6,
        format!("error non-increasing in m on 20 graphs, worst at m=40 {worst_at_40:.2e} (tol 1e-6)"),
    )
}

fn prox_oracles() -> Verdict {
    let mut rng = seeded_rng(303);
    let obj = |u: f64, x: f64, eta: f64| eta * u.abs() + 0.5 * (u - x).powi(2);
    let grid_argmin = |x: f64, eta: f64| {
        // coarse pass over [-6, 6], then two refinements around the best point
        let (mut best, mut step, mut half) = (0.0, 1e-2, 6.0);
        for _ in 0..3 {
            let centre = best;
            let steps = (2.0 * half / step) as i64;
            for s in 0..=steps {
                let u = centre - half + s as f64 * step;
                if obj(u, x, eta) < obj(best, x, eta) {
                    best = u;
                }
            }
            half = 2.0 * step;
            step /= 100.0;
        }
        best
    };
    let mut worst_scalar = 0.0f64;
    for _ in 0..200 {
        let x = rng.random_range(-5.0..5.0);
        let eta = rng.random_range(0.0..3.0);
        let got = prox::soft_threshold_scalar(x, eta).unwrap();
        worst_scalar = worst_scalar.max((got - grid_argmin(x, eta)).abs());
    }
    let mut worst_kkt = 0.0f64;
    for _ in 0..200 {
        let d = rng.random_range(1..6);
        let m = random_signal(&mut rng, 1, d);
        let eta = rng.random_range(0.0..3.0);
        let v = prox::soft_threshold_rows(&m.view(), &[eta]).unwrap();
        let vn = linalg::frobenius(&v.view());
        let resid = if vn > 0.0 {
            linalg::frobenius(&(&v - &m + &(&v * (eta / vn))).view())
        } else {
            (linalg::frobenius(&m.view()) - eta).max(0.0)
        };
        worst_kkt = worst_kkt.max(resid);
    }
    check(
        worst_scalar <= 1e-4 && worst_kkt <= 1e-10,
        format!("scalar vs grid argmin {worst_scalar:.2e} (tol 1e-4), group KKT residual {worst_kkt:.2e} (tol 1e-10)"),
    )
}

fn linear_algebra_oracles() -> Verdict {
    let mut rng = seeded_rng(404);
    let g = sbm_generate(&[15, 15], 0.4, 0.05, &mut rng).unwrap();
    let x = random_signal(&mut rng, 30, 5);
    let sys = FrameletSystem::new(&g, &FrameletConfig::default(), haar_filter_bank()).unwrap();
    let cfg = SolverConfig {
        max_iter: 3,
        y_diagonal: YDiagonal::Free,
        ..SolverConfig::default()
    };
    let state = dot::solve(&g, &sys, &x.view(), &cfg).unwrap().state;

    let (system, rhs) = u_system(&state, &g, Some(&sys), &x.view(), &cfg).unwrap();
    let rhs_norm = linalg::frobenius(&rhs.view());
    let mut u_worst = 0.0f64;
    for mode in [USolve::Cholesky, USolve::ConjugateGradient] {
        let u = system.solve(&rhs.view(), mode).unwrap();
        u_worst = u_worst.max(linalg::frobenius(&(system.apply(&u.view()) - &rhs).view()) / rhs_norm);
    }

    let [mu1, _, mu3, mu4] = state.mu;
    let m = state.u.dot(&state.u.t()) * mu1 + Array2::from_elem((30, 30), mu3) + Array2::<f64>::eye(30) * mu4;
    let dense = y_rhs(&state).dot(&linalg::dense_inverse(&m.view()).unwrap());
    let y_err = linalg::max_abs(&(update_y(&state, &cfg).unwrap() - &dense).view());

    let u_tv = tv_smooth(&g, &x.view(), 0.3, TvMode::Exact).unwrap();
    let dx = Array2::from_shape_fn(x.dim(), |(i, j)| g.degrees()[i] * x[[i, j]]);
    let mut resid = tv_system(&g, 0.3).mul_dense(&u_tv.view()) - &dx;
    for i in (0..g.n()).filter(|&i| g.is_isolated(i)) {
        resid.row_mut(i).fill(0.0);
    }
    let tv_rel = linalg::frobenius(&resid.view()) / linalg::frobenius(&dx.view());

    check(
        u_worst <= 1e-8 && y_err <= 1e-8 && tv_rel <= 1e-8,
        format!("U-system {u_worst:.2e}, Woodbury vs dense {y_err:.2e}, TV first-order {tv_rel:.2e} (tol 1e-8 each)"),
    )
}

fn hybrid_instance() -> ScenarioInstance {
    Scenario::default().build().unwrap()
}

fn framelet_for(g: &Graph, cfg: &RunConfig) -> FrameletSystem {
    cfg.build_system(g).unwrap()
}

fn multiplier_bounds() -> Verdict {
    let inst = hybrid_instance();
    let mut details = Vec::new();
    for rho in [1.1, 1.5] {
        let mut cfg = reference_config();
        cfg.solver.rho = rho;
        let sys = framelet_for(&inst.graph, &cfg);
        let out = dot::solve(&inst.graph, &sys, &inst.noisy.view(), &cfg.solver).unwrap();
        let per_iter = out.trace.records.iter().map(|r| r.kkt_dual_max.unwrap()).fold(0.0f64, f64::max);
        let kkt = kkt_residuals(&out.state, &inst.graph, Some(&sys), &cfg.solver).unwrap();
        let l2 = kkt.lambda2_excess.iter().map(|(_, v)| *v).fold(0.0f64, f64::max);
        if out.trace.len() != 10 || per_iter > 1e-6 || kkt.lambda4_excess > 1e-6 || l2 > 1e-6 {
            return Err(format!(
                "rho {rho}: per-iteration excess {per_iter:.2e}, final Λ₄ {:.2e}, Λ₂ {l2:.2e}",
                kkt.lambda4_excess
            ));
        }
        details.push(format!("rho {rho}: max excess {per_iter:.1e}"));
    }
    Ok(format!(
        "‖Λ₄‖∞ ≤ 1 and |Λ₂| ≤ νd within 1e-6 at all 10 iterations ({})",
        details.join(", ")
    ))
}

fn feasibility_drive() -> Verdict {
    let inst = hybrid_instance();
    let cfg = reference_config();
    assert_eq!(cfg.solver.rho, 1.5);
    let sys = framelet_for(&inst.graph, &cfg);
    let trace = dot::solve(&inst.graph, &sys, &inst.noisy.view(), &cfg.solver).unwrap().trace;
    let (r3, r10) = (&trace.records[2], &trace.records[9]);
    let pick = |r: &dot::IterationRecord| [r.r1.unwrap(), r.r2.unwrap(), r.r3.unwrap(), r.r4.unwrap()];
    let (early, last) = (pick(r3), pick(r10));
    let ok = (0..4).all(|i| last[i] <= 1e-2 && last[i] <= early[i]);
    check(
        ok,
        format!(
            "iteration 10 residuals [{}] vs iteration 3 [{}] (tol 1e-2)",
            last.map(|v| format!("{v:.2e}")).join(", "),
            early.map(|v| format!("{v:.2e}")).join(", ")
        ),
    )
}

fn ratios(inst: &ScenarioInstance, cfg: &RunConfig) -> (f64, f64, f64, f64) {
    let sys = framelet_for(&inst.graph, cfg);
    let x = inst.noisy.view();
    let m = |u: &Signal| recovery_metrics(&u.view(), &inst.clean.view(), &x).unwrap();
    let dot_u = dot::solve(&inst.graph, &sys, &x, &cfg.solver).unwrap().u;
    let node_u = node_admm_solve(&inst.graph, &sys, &x, &cfg.solver).unwrap().u;
    let edge_u = edge_admm_solve(&inst.graph, &x, &cfg.solver).unwrap().u;
    let tv_u = tv_smooth(&inst.graph, &x, cfg.alpha, cfg.tv_mode).unwrap();
    // structure-only scenarios have a noiseless input, so compare raw MSE there
    let pick = |r: dot_denoise::perturb::RecoveryReport| if r.mse_noisy > 0.0 { r.improvement_ratio } else { r.mse_denoised };
    (pick(m(&dot_u)), pick(m(&node_u)), pick(m(&edge_u)), pick(m(&tv_u)))
}

fn denoising_efficacy() -> Verdict {
    let (dot_r, node_r, _, _) = ratios(&hybrid_instance(), &reference_config());
    let detail = format!("DoT {dot_r:.17e}, node-ADMM {node_r:.17e}");
    if !(dot_r < 1.0 && node_r < 1.0) {
        return Err(format!("ratio not below 1: {detail}"));
    }
    let golden_ok = (dot_r - GOLDEN_DOT_RATIO).abs() <= GOLDEN_TOL && (node_r - GOLDEN_NODE_RATIO).abs() <= GOLDEN_TOL;
    check(
        golden_ok,
        format!("{detail} (goldens {GOLDEN_DOT_RATIO:.12}, {GOLDEN_NODE_RATIO:.12} ±1e-9)"),
    )
}

fn ablation_ordering() -> Verdict {
    let cfg = reference_config();
    let mut feature_only = Scenario::default();
    feature_only.noise.structure_ratio = 0.0;
    let mut structure_only = Scenario::default();
    structure_only.noise.feature = None;
    let (_, node_f, edge_f, _) = ratios(&feature_only.build().unwrap(), &cfg);
    let (_, _, edge_s, tv_s) = ratios(&structure_only.build().unwrap(), &cfg);
    check(
        node_f <= edge_f + 1e-6 && edge_s <= tv_s + 1e-6,
        format!("feature-only node {node_f:.4} <= edge {edge_f:.4}; structure-only MSE edge {edge_s:.3e} <= TV {tv_s:.3e}"),
    )
}

fn run_denoise(bin: &str, dir: &Path, out: &str) -> Result<(Vec<u8>, Vec<u8>), String> {
    let status = Command::new(bin)
        .args(["denoise", "--solver", "dot", "--edges"])
        .arg(dir.join("edges.txt"))
        .arg("--features")
        .arg(dir.join("features.csv"))
        .arg("--config")
        .arg(dir.join("config.json"))
        .arg("--u-solve")
        .arg("cholesky")
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    let read = |f: &str| std::fs::read(dir.join(out).join(f)).map_err(|e| e.to_string());
    Ok((read("trace.csv")?, read("U.csv")?))
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_dot-denoise");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let inst = hybrid_instance();
    io::write_edge_list(&tmp.path().join("edges.txt"), &inst.graph).map_err(|e| e.to_string())?;
    io::write_matrix(&tmp.path().join("features.csv"), &inst.noisy.view()).map_err(|e| e.to_string())?;
    let cfg = serde_json::to_string(&reference_config()).map_err(|e| e.to_string())?;
    std::fs::write(tmp.path().join("config.json"), cfg).map_err(|e| e.to_string())?;
    let a = run_denoise(bin, tmp.path(), "run_a")?;
    let b = run_denoise(bin, tmp.path(), "run_b")?;
    let lines = a.0.iter().filter(|&&c| c == b'\n').count();
    check(
        a == b && lines == 11,
        format!(
            "trace.csv and U.csv identical across reruns ({} and {} bytes, {lines} trace lines)",
            a.0.len(),
            a.1.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("tight-frame identity", Duration::from_secs(10), tight_frame_identity),
        ("Chebyshev fidelity", Duration::from_secs(30), chebyshev_fidelity),
        ("prox oracles", Duration::from_secs(5), prox_oracles),
        ("linear-algebra oracles", Duration::from_secs(10), linear_algebra_oracles),
        ("multiplier bounds", Duration::from_secs(60), multiplier_bounds),
        ("feasibility drive", Duration::from_secs(60), feasibility_drive),
        ("denoising efficacy", Duration::from_secs(120), denoising_efficacy),
        ("ablation ordering", Duration::from_secs(120), ablation_ordering),
        ("determinism", Duration::from_secs(120), determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let verdict = match verdict {
            Ok(d) if elapsed > budget => Err(format!("{d}; took {elapsed:.1?}, budget {budget:?}")),
            v => v,
        };
        match verdict {
            Ok(d) => println!("criterion {} {name}: PASS ({elapsed:.1?}) {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({elapsed:.1?}) {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
