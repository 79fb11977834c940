use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use serde_json::json;

use super::{create_dir, sha256_hex, write_file, Failure, InputArgs, OUT_DIR_ENV};
use crate::io;
use crate::perturb::{perturb_edges, perturb_features, seeded_rng, FeatureNoise, NoiseSpec};

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// `gaussian:<sigma>` or `flip:<ratio>`.
    #[arg(long)]
    pub feature_noise: Option<FeatureNoise>,
    /// Fraction of edges rewired; half deleted, the same number re-added.
    #[arg(long, default_value_t = 0.0)]
    pub edge_ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = OUT_DIR_ENV, default_value = "dot-denoise-out")]
    pub out: PathBuf,
}

/// Writes `edges.txt`, `features.csv` and `provenance.json` to the output
/// directory. Feature noise is drawn before edge noise from one generator.
pub(super) fn run(args: &PerturbArgs) -> Result<ExitCode, Failure> {
    let spec = NoiseSpec {
        feature: args.feature_noise,
        structure_ratio: args.edge_ratio,
        seed: args.seed,
    };
    spec.validate()?;
    let (g, x) = args.input.load()?;
    let mut rng = seeded_rng(spec.seed);
    let x_out = match spec.feature {
        Some(noise) => perturb_features(&x.view(), noise, &mut rng)?,
        None => x,
    };
    let g_out = if spec.structure_ratio > 0.0 {
        perturb_edges(&g, spec.structure_ratio, &mut rng)?
    } else {
        g
    };

    create_dir(&args.out)?;
    let edges_text = io::format_edge_list(&g_out);
    let features_text = io::format_matrix(&x_out.view(), ',');
    write_file(&args.out.join("edges.txt"), &edges_text)?;
    write_file(&args.out.join("features.csv"), &features_text)?;
    let read = |p: &PathBuf| std::fs::read(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())));
    let provenance = json!({
        "seed": spec.seed,
        "noise": spec,
        "inputs": {
            "edges": { "path": args.input.edges, "sha256": sha256_hex(&read(&args.input.edges)?) },
            "features": { "path": args.input.features, "sha256": sha256_hex(&read(&args.input.features)?) },
        },
        "outputs": {
            "edges.txt": sha256_hex(edges_text.as_bytes()),
            "features.csv": sha256_hex(features_text.as_bytes()),
        },
        "edge_count": g_out.edge_count(),
    });
    let text = serde_json::to_string_pretty(&provenance).map_err(|e| Failure::Invalid(e.to_string()))?;
    write_file(&args.out.join("provenance.json"), text + "\n")?;
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}
