//! `maxess --config run.json [--workers N] [--seed S] [--out DIR]`
//!
//! Exit status 0 on success, 2 when the configuration does not validate, 3 when
//! the computation fails. Errors are also written to stderr as one JSON object.

mod config;
mod emit;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

use config::RunConfig;
use emit::{sha256_hex, Artifacts, ArtifactEntry, Manifest};

#[derive(Parser, Debug)]
#[command(name = "maxess", version, about = "Essential spectra of anisotropic Maxwell pencils")]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; overrides `output.dir` of the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Validation,
    Computation,
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn validation(field: &str, message: String) -> Self {
        CliError { kind: ErrorKind::Validation, field: Some(field.to_string()), message }
    }

    pub fn computation(message: String) -> Self {
        CliError { kind: ErrorKind::Computation, field: None, message }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::computation(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Validation => 2,
            ErrorKind::Computation => 3,
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let started = Instant::now();
    let raw = std::fs::read(&args.config).map_err(|e| CliError::validation("--config", format!("{}: {e}", args.config.display())))?;
    let text = std::str::from_utf8(&raw).map_err(|e| CliError::validation("--config", e.to_string()))?;
    let config = RunConfig::from_json(text)?;
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let params = config.validate(&base)?;
    let field = config.coefficients.build(&config.domain, &base)?;
    let out_dir = match (&args.out, &config.output.dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => config::resolve(&base, d),
        (None, None) => return Err(CliError::validation("output.dir", "give --out or output.dir".into())),
    };
    let workers = args.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if workers == 0 {
        return Err(CliError::validation("--workers", "must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::computation(e.to_string()))?;
    let mut out = Artifacts::new(&out_dir)?;
    let ctx = run::Context { config: &config, base: &base, seed: args.seed };
    pool.install(|| run::dispatch(&ctx, &params, &field, &mut out))?;
    let manifest = Manifest {
        tool: "maxess",
        version: env!("CARGO_PKG_VERSION"),
        core_version: maxess_core::VERSION,
        command: config.command.name(),
        config_sha256: sha256_hex(&raw),
        seed: args.seed,
        workers,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        artifacts: out.written.iter().map(|(p, h)| ArtifactEntry { path: p, sha256: h }).collect(),
    };
    let text = emit::to_json(&manifest)?;
    let path = out.path("manifest.json");
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e }));
            ExitCode::from(e.exit_code())
        }
    }
}
