//! The `ncadmm` command-line runner.
//!
//! Exit codes: 0 on success, 1 for file-system failures, 2 for invalid
//! configuration or usage, 3 when a computation fails numerically.

pub mod config;
mod error;
pub mod run;
pub mod summarize;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{ConfigFile, Kind, Overrides, ResolvedConfig, DETERMINISTIC_ENV};
pub use error::CliError;
pub use run::{execute, RunReport, MANIFEST_NAME};

#[derive(Debug, Parser)]
#[command(name = "ncadmm", version, about = "Linearized nonconvex ADMM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write traces, images and a manifest.
    Run(RunArgs),
    /// Check a configuration without running anything.
    ValidateConfig(RunArgs),
    /// Summarize trace files (or directories of them) for gnuplot.
    Summarize {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Also print every trace as a data block.
        #[arg(long)]
        series: bool,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    experiment: Option<Kind>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Penalty parameter; repeat the flag for a sweep.
    #[arg(long = "sigma")]
    sigmas: Vec<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "out")]
    output: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

impl RunArgs {
    fn resolve(&self) -> Result<ResolvedConfig, CliError> {
        let (mut file, base) = match &self.config {
            Some(path) => {
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (ConfigFile::load(path)?, base)
            }
            None => (ConfigFile::default(), PathBuf::new()),
        };
        let cwd = std::env::current_dir()?;
        let base = if base.as_os_str().is_empty() { cwd.clone() } else { cwd.join(base) };
        let output = self.output.as_ref().map(|o| cwd.join(o));
        file.apply(&Overrides {
            kind: self.experiment,
            sigmas: self.sigmas.clone(),
            iters: self.iters,
            seed: self.seed,
            output,
            workers: self.workers,
        });
        ResolvedConfig::resolve(&file, &base, config::deterministic_mode())
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let report = execute(&config)?;
            for line in &report.lines {
                println!("{line}");
            }
            println!("wrote {} files to {}", report.files.len(), config.output.display());
        }
        Command::ValidateConfig(args) => {
            let config = args.resolve()?;
            println!(
                "ok: {} experiment, {} sigma value(s), {} iterations, seed {}",
                config.kind.name(),
                config.sigmas.len(),
                config.iters,
                config.seed
            );
        }
        Command::Summarize { paths, series } => print!("{}", summarize::summarize(&paths, series)?),
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
