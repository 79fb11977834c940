use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::{create_dir, serde_enum, write_file, Failure, InputArgs, OUT_DIR_ENV};
use crate::ablations::TvMode;
use crate::dot::{kkt_residuals, EThreshold, KktReport, PrimalResiduals, SweepOrder, USolve, YDiagonal};
use crate::framelet::DilationSchedule;
use crate::graph::LaplacianKind;
use crate::io::{self, CoefficientMeta};
use crate::run::{run_solver, RunConfig, SolverKind};

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long, value_enum, default_value_t = SolverKind::Dot)]
    pub solver: SolverKind,
    #[command(flatten)]
    pub input: InputArgs,
    /// Flat JSON config. Flags below override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "dot-denoise-out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub nu0: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Four comma-separated initial penalties.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub mu_init: Option<Vec<f64>>,
    /// Four comma-separated penalty caps.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub mu_max: Option<Vec<f64>>,
    #[arg(long)]
    pub tol_residual: Option<f64>,
    #[arg(long, value_parser = serde_enum::<USolve>)]
    pub u_solve: Option<USolve>,
    #[arg(long, value_parser = serde_enum::<EThreshold>)]
    pub e_threshold_mode: Option<EThreshold>,
    #[arg(long, value_parser = serde_enum::<SweepOrder>)]
    pub sweep_order: Option<SweepOrder>,
    #[arg(long, value_parser = serde_enum::<YDiagonal>)]
    pub y_diagonal: Option<YDiagonal>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub cheb_order: Option<usize>,
    #[arg(long, value_parser = serde_enum::<LaplacianKind>)]
    pub laplacian: Option<LaplacianKind>,
    #[arg(long, value_parser = serde_enum::<DilationSchedule>)]
    pub schedule: Option<DilationSchedule>,
    /// Smoothing weight of the TV solver.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = serde_enum::<TvMode>)]
    pub tv_mode: Option<TvMode>,
}

fn four(v: &[f64]) -> [f64; 4] {
    [v[0], v[1], v[2], v[3]]
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.solver;
        macro_rules! set {
            ($($src:ident => $dst:expr),* $(,)?) => {
                $(if let Some(v) = self.$src.clone() { $dst = v; })*
            };
        }
        set!(
            max_iter => s.max_iter,
            lambda1 => s.lambda1,
            lambda2 => s.lambda2,
            nu0 => s.nu0,
            rho => s.rho,
            tol_residual => s.tol_residual,
            u_solve => s.u_solve,
            e_threshold_mode => s.e_threshold_mode,
            sweep_order => s.sweep_order,
            y_diagonal => s.y_diagonal,
            levels => cfg.framelet.levels,
            cheb_order => cfg.framelet.cheb_order,
            laplacian => cfg.framelet.laplacian,
            schedule => cfg.framelet.schedule,
            alpha => cfg.alpha,
            tv_mode => cfg.tv_mode,
        );
        if let Some(v) = &self.mu_init {
            cfg.solver.mu_init = four(v);
        }
        if let Some(v) = &self.mu_max {
            cfg.solver.mu_max = four(v);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameletInfo {
    pub lambda_max: f64,
    pub dilation: u32,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub solver: SolverKind,
    pub n: usize,
    pub d: usize,
    pub edges: usize,
    pub iterations: usize,
    pub config: RunConfig,
    pub final_objective: Option<f64>,
    pub residuals: Option<PrimalResiduals>,
    pub kkt: Option<KktReport>,
    pub framelet: Option<FrameletInfo>,
    pub wall_time_s: f64,
}

pub(super) fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, Failure> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    overrides.apply(&mut cfg);
    let problems = cfg.problems();
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("config: {p}");
        }
        return Err(Failure::Invalid(format!("{} config problem(s)", problems.len())));
    }
    Ok(cfg)
}

/// Writes `U.csv`, `Z.csv` (structure solvers), `trace.csv`, `summary.json`,
/// the inputs as read under `inputs/`, and the final solver variables under
/// `state/`.
pub(super) fn run(args: &DenoiseArgs) -> Result<ExitCode, Failure> {
    let cfg = load_config(args.config.as_deref(), &args.overrides)?;
    let (g, x) = args.input.load()?;
    let started = Instant::now();
    let out = run_solver(args.solver, &g, &x.view(), &cfg)?;
    let wall_time_s = started.elapsed().as_secs_f64();

    let kkt = match &out.state {
        Some(state) => Some(kkt_residuals(state, &g, out.system.as_ref(), &cfg.solver)?),
        None => None,
    };
    let residuals = kkt.as_ref().map(|k| k.residuals);
    let summary = RunSummary {
        solver: args.solver,
        n: g.n(),
        d: x.ncols(),
        edges: g.edge_count(),
        iterations: out.trace.len(),
        config: cfg.clone(),
        final_objective: out.trace.last().map(|r| r.objective),
        residuals,
        kkt,
        framelet: out.system.as_ref().map(|s| FrameletInfo {
            lambda_max: s.lambda_max(),
            dilation: s.dilation(),
        }),
        wall_time_s,
    };

    let dir = &args.out;
    create_dir(&dir.join("inputs"))?;
    write_file(&dir.join("inputs").join("graph.txt"), io::format_edge_list(&g))?;
    write_file(&dir.join("inputs").join("X.csv"), io::format_matrix(&x.view(), ','))?;
    write_file(&dir.join("U.csv"), io::format_matrix(&out.u.view(), ','))?;
    if let Some(z) = &out.z {
        write_file(&dir.join("Z.csv"), io::format_matrix(&z.view(), ','))?;
    }
    write_file(&dir.join("trace.csv"), out.trace.to_csv())?;
    let meta = out.system.as_ref().map(CoefficientMeta::from_system);
    if let Some(state) = &out.state {
        io::write_state(&dir.join("state"), state, meta.as_ref())?;
    }
    if let (Some((q, lam2)), Some(meta)) = (&out.node_q, &meta) {
        io::write_coefficients(&dir.join("state").join("q"), q, meta)?;
        io::write_coefficients(&dir.join("state").join("lam2"), lam2, meta)?;
    }
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Failure::Invalid(e.to_string()))?;
    write_file(&dir.join("summary.json"), text + "\n")?;

    println!(
        "{} on n={} d={}: {} iterations in {:.3}s, final objective {}",
        args.solver,
        g.n(),
        x.ncols(),
        summary.iterations,
        wall_time_s,
        summary.final_objective.map_or("n/a".into(), |v| format!("{v:.6e}"))
    );
    Ok(ExitCode::SUCCESS)
}
