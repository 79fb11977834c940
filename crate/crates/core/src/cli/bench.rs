use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;

use super::{write_file, Failure};
use crate::run::{bench_csv, run_bench, BenchSpec, RunConfig};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// JSON with optional `scenario`, `config` and `solvers` entries.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the table to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for independent cells.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

pub(super) fn run(args: &BenchArgs) -> Result<ExitCode, Failure> {
    let mut spec = match &args.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?;
            if let Some(cfg) = value.get("config") {
                let unknown = RunConfig::unknown_keys(cfg);
                if !unknown.is_empty() {
                    return Err(Failure::Invalid(format!("unknown config keys: {}", unknown.join(", "))));
                }
            }
            serde_json::from_value::<BenchSpec>(value).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?
        }
        None => BenchSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.scenario.noise.seed = seed;
    }
    let mut problems = spec.config.problems();
    if let Err(e) = spec.scenario.noise.validate() {
        problems.push(e.to_string());
    }
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("scenario: {p}");
        }
        return Err(Failure::Invalid(format!("{} scenario problem(s)", problems.len())));
    }
    let rows = run_bench(&spec, args.jobs)?;
    let table = bench_csv(&rows);
    if let Some(path) = &args.out {
        write_file(path, &table)?;
    }
    print!("{table}");
    Ok(ExitCode::SUCCESS)
}
