//! Solver dispatch shared by the command line and the seeded benchmark.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::ablations::{edge_admm_solve, node_admm_solve, tv_smooth, TvMode};
use crate::dot::{self, DiagnosticsTrace, DotState, SolverConfig};
use crate::error::{Error, Result};
use crate::framelet::{haar_filter_bank, FrameletConfig, FrameletSystem};
use crate::graph::{Graph, Signal};
use crate::perturb::{recovery_metrics, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Dot,
    NodeAdmm,
    EdgeAdmm,
    Tv,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [SolverKind::Dot, SolverKind::NodeAdmm, SolverKind::EdgeAdmm, SolverKind::Tv];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Dot => "dot",
            SolverKind::NodeAdmm => "node-admm",
            SolverKind::EdgeAdmm => "edge-admm",
            SolverKind::Tv => "tv",
        }
    }

    pub fn uses_framelets(self) -> bool {
        matches!(self, SolverKind::Dot | SolverKind::NodeAdmm)
    }

    /// Solvers that estimate a structure matrix alongside U.
    pub fn learns_structure(self) -> bool {
        matches!(self, SolverKind::Dot | SolverKind::EdgeAdmm)
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Every tunable of every solver as one flat document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub solver: SolverConfig,
    #[serde(flatten)]
    pub framelet: FrameletConfig,
    pub alpha: f64,
    pub tv_mode: TvMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            solver: SolverConfig::default(),
            framelet: FrameletConfig::default(),
            alpha: 0.1,
            tv_mode: TvMode::Exact,
        }
    }
}

impl RunConfig {
    /// Parses a JSON object, reporting keys no solver reads.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let unknown = Self::unknown_keys(&value);
        if !unknown.is_empty() {
            return Err(Error::InvalidInput(format!("unknown config keys: {}", unknown.join(", "))));
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn unknown_keys(value: &serde_json::Value) -> Vec<String> {
        let known: BTreeSet<String> = match serde_json::to_value(RunConfig::default()) {
            Ok(serde_json::Value::Object(m)) => m.keys().cloned().collect(),
            _ => BTreeSet::new(),
        };
        match value {
            serde_json::Value::Object(m) => m.keys().filter(|k| !known.contains(*k)).cloned().collect(),
            _ => vec!["<config is not a JSON object>".to_string()],
        }
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = self.solver.problems();
        if self.framelet.levels == 0 {
            out.push("levels must be at least 1".into());
        }
        if self.framelet.cheb_order == 0 {
            out.push("cheb_order must be at least 1".into());
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            out.push(format!("alpha must be finite and nonnegative, got {}", self.alpha));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(problems.join("; ")))
        }
    }

    pub fn build_system(&self, g: &Graph) -> Result<FrameletSystem> {
        FrameletSystem::new(g, &self.framelet, haar_filter_bank())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub u: Signal,
    pub z: Option<Array2<f64>>,
    pub trace: DiagnosticsTrace,
    /// Full solver state for the structure-learning solvers.
    pub state: Option<DotState>,
    pub node_q: Option<(crate::framelet::Coefficients, crate::framelet::Coefficients)>,
    pub system: Option<FrameletSystem>,
}

/// Runs one solver. The TV smoother records a single trace row holding its
/// objective value.
pub fn run_solver(kind: SolverKind, g: &Graph, x: &ArrayView2<f64>, cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let system = if kind.uses_framelets() { Some(cfg.build_system(g)?) } else { None };
    let out = match kind {
        SolverKind::Dot => {
            let out = dot::solve(g, system.as_ref().expect("built above"), x, &cfg.solver)?;
            RunOutput {
                u: out.u,
                z: Some(out.z),
                trace: out.trace,
                state: Some(out.state),
                node_q: None,
                system,
            }
        }
        SolverKind::EdgeAdmm => {
            let out = edge_admm_solve(g, x, &cfg.solver)?;
            RunOutput {
                u: out.u,
                z: Some(out.z),
                trace: out.trace,
                state: Some(out.state),
                node_q: None,
                system,
            }
        }
        SolverKind::NodeAdmm => {
            let out = node_admm_solve(g, system.as_ref().expect("built above"), x, &cfg.solver)?;
            RunOutput {
                u: out.u,
                z: None,
                trace: out.trace,
                state: None,
                node_q: Some((out.q, out.lam2)),
                system,
            }
        }
        SolverKind::Tv => {
            let u = tv_smooth(g, x, cfg.alpha, cfg.tv_mode)?;
            let objective = crate::ablations::tv_objective(g, &u.view(), x, cfg.alpha)?;
            let trace = DiagnosticsTrace {
                records: vec![dot::IterationRecord {
                    iter: 1,
                    objective,
                    ..Default::default()
                }],
            };
            RunOutput {
                u,
                z: None,
                trace,
                state: None,
                node_q: None,
                system,
            }
        }
    };
    Ok(out)
}

/// Scenario plus solver settings for the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSpec {
    pub scenario: Scenario,
    pub config: RunConfig,
    pub solvers: Vec<SolverKind>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            scenario: Scenario::default(),
            config: reference_config(),
            solvers: SolverKind::ALL.to_vec(),
        }
    }
}

/// Settings for the seeded 100-node benchmark scenario. Ten sweeps at these
/// penalties bring every constraint residual below 1e-2.
pub fn reference_config() -> RunConfig {
    RunConfig {
        solver: SolverConfig {
            nu0: 5.0,
            rho: 1.5,
            mu_init: [20.0, 20.0, 30.0, 30.0],
            ..SolverConfig::default()
        },
        ..RunConfig::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub solver: SolverKind,
    /// Solver applied to the uncontaminated graph and features.
    pub noise_free_mse: f64,
    pub noisy_mse: f64,
    pub denoised_mse: f64,
}

pub const BENCH_COLUMNS: [&str; 4] = ["solver", "noise_free_mse", "noisy_mse", "denoised_mse"];

/// Runs every (solver, clean/noisy) cell on up to `jobs` threads. Row order follows `spec.solvers` regardless of `jobs`.
pub fn run_bench(spec: &BenchSpec, jobs: usize) -> Result<Vec<BenchRow>> {
    spec.config.validate()?;
    if spec.solvers.is_empty() {
        return Err(Error::InvalidInput("benchmark needs at least one solver".into()));
    }
    let inst = spec.scenario.build()?;
    let cells: Vec<(SolverKind, bool)> = spec.solvers.iter().flat_map(|&s| [(s, false), (s, true)]).collect();
    let run_cell = |&(kind, noisy): &(SolverKind, bool)| -> Result<f64> {
        let (g, x) = if noisy {
            (&inst.graph, &inst.noisy)
        } else {
            (&inst.clean_graph, &inst.clean)
        };
        let out = run_solver(kind, g, &x.view(), &spec.config)?;
        Ok(recovery_metrics(&out.u.view(), &inst.clean.view(), &inst.noisy.view())?.mse_denoised)
    };
    let jobs = jobs.clamp(1, cells.len());
    let results: Vec<Mutex<Option<Result<f64>>>> = cells.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(cell) = cells.get(i) else { break };
        let value = run_cell(cell);
        *results[i].lock().expect("no panics while holding the lock") = Some(value);
    };
    std::thread::scope(|scope| {
        for _ in 1..jobs {
            scope.spawn(worker);
        }
        worker();
    });
    let noisy_mse = crate::perturb::mse(&inst.noisy.view(), &inst.clean.view())?;
    let mut values = results
        .into_iter()
        .map(|r| r.into_inner().expect("no panics while holding the lock").expect("every cell ran"));
    let mut rows = Vec::with_capacity(spec.solvers.len());
    for &solver in &spec.solvers {
        let noise_free_mse = values.next().expect("two cells per solver")?;
        let denoised_mse = values.next().expect("two cells per solver")?;
        rows.push(BenchRow {
            solver,
            noise_free_mse,
            noisy_mse,
            denoised_mse,
        });
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = BENCH_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e}\n",
            r.solver, r.noise_free_mse, r.noisy_mse, r.denoised_mse
        ));
    }
    out
}
