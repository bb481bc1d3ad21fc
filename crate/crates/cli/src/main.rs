#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use specmult_core::ErrorClass;

use args::{Cli, Command};
use commands::Ctx;
use config::ConfigFile;

pub const OUT_DIR_ENV: &str = "SPECMULT_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] specmult_core::Error),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Parse => 2,
                ErrorClass::Structural => 3,
                ErrorClass::Parameter => 4,
                ErrorClass::Numerical => 5,
            },
            CliError::Config { .. } => 2,
            CliError::Usage(_) | CliError::Io(_) => 4,
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let workers: Option<usize> = cfg.pick(cli.workers, "workers")?;
    if workers == Some(0) {
        return Err(CliError::Usage("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let out_dir: Option<PathBuf> = match cfg.pick(cli.out_dir.clone(), "out-dir")? {
        Some(dir) => Some(dir),
        None => std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from),
    };

    let ctx = Ctx { cfg: &cfg, pool: &pool };
    let outcome = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(&ctx, a)?,
        Command::Bound(a) => commands::bound(&ctx, a)?,
        Command::KernelCert(a) => commands::kernel_cert(&ctx, a)?,
        Command::Construct(a) => commands::construct(&ctx, a)?,
        Command::Identities(a) => commands::identities(&ctx, a)?,
        Command::Formula(a) => commands::formula(&ctx, a)?,
    };

    let json = outcome.report.to_json()?;
    for (path, text) in &outcome.extra_files {
        std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    if let Some(dir) = &out_dir {
        let path = output::write_into(dir, &format!("{}.json", outcome.report.command), &json)?;
        eprintln!("wrote {}", path.display());
    }
    match &outcome.plain {
        Some(text) => println!("{text}"),
        None => println!("{json}"),
    }
    Ok(outcome.report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("specmult: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
