//! Command-line front end: `perturb`, `denoise`, `check` and `bench`.
//!
//! Exit codes are 0 on success, 1 for validation or check failures and 2
//! for unreadable or unwritable files.

mod bench;
mod check;
mod denoise;
mod perturb;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::graph::{build_graph, Graph, Signal};
use crate::io::{self, MatrixFormat};

pub use check::{CheckRow, CheckStatus};
pub use denoise::RunSummary;

/// Default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "DOT_DENOISE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "dot-denoise",
    version,
    about = "Graph signal and structure denoising with framelet-regularized ADMM"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Contaminate a graph and its features with seeded noise.
    #[command(allow_negative_numbers = true)]
    Perturb(perturb::PerturbArgs),
    /// Run one solver and write its estimates and diagnostics.
    #[command(allow_negative_numbers = true)]
    Denoise(denoise::DenoiseArgs),
    /// Re-validate a finished run directory offline.
    Check(check::CheckArgs),
    /// Run the seeded scenario for every solver and print a metrics table.
    Bench(bench::BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Edge list, one `i j [w]` per line.
    #[arg(long)]
    pub edges: PathBuf,
    /// Feature matrix, one row per node.
    #[arg(long)]
    pub features: PathBuf,
    /// Field delimiter of the feature file.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// The feature file starts with a header row.
    #[arg(long)]
    pub header: bool,
}

impl InputArgs {
    fn format(&self) -> Result<MatrixFormat, Failure> {
        let delimiter = u8::try_from(self.delimiter)
            .map_err(|_| Failure::Invalid(format!("delimiter must be a single-byte character, got {:?}", self.delimiter)))?;
        Ok(MatrixFormat {
            delimiter,
            header: self.header,
        })
    }

    /// Reads the features, then the edge list over as many nodes as feature rows.
    fn load(&self) -> Result<(Graph, Signal), Failure> {
        let x = io::read_matrix(&self.features, self.format()?).map_err(|e| Failure::io(&self.features, e))?;
        let edges = io::read_edge_list(&self.edges).map_err(|e| Failure::io(&self.edges, e))?;
        let g = build_graph(&edges, x.nrows()).map_err(|e| Failure::Invalid(format!("{}: {e}", self.edges.display())))?;
        Ok((g, x))
    }
}

#[derive(Debug)]
pub(crate) enum Failure {
    Invalid(String),
    Io(String),
}

impl Failure {
    fn io(path: &Path, e: Error) -> Self {
        Failure::Io(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Parse { .. } => Failure::Io(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses a snake_case enum name through its serde representation.
fn serde_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Perturb(a) => perturb::run(&a),
        Command::Denoise(a) => denoise::run(&a),
        Command::Check(a) => check::run(&a),
        Command::Bench(a) => bench::run(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
