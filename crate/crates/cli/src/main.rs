//! `rydcomp`: batch front-end writing CSV tables with run metadata.
//!
//! Exit codes: 0 on success, 2 for invalid options or configuration
//! (including unwritable outputs), 3 for numerical failures. No output files
//! are left behind on failure.

mod commands;
mod config;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

use config::{merge, Cli, Common, ConfigFile};
use output::{gnuplot_script, with_suffix, Outputs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<rydcomp::Error> for CliError {
    fn from(e: rydcomp::Error) -> Self {
        use rydcomp::Error as E;
        match e {
            E::Domain(_) | E::Geometry(_) | E::PatternMismatch(_) | E::DimensionMismatch(..) => {
                CliError::Config(e.to_string())
            }
            E::Overflow(_) | E::NoRoot { .. } | E::GapCollapse { .. } | E::TriangleDesign { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    let file = cli.common.config.as_deref().map(|p| ConfigFile::load(p, name)).transpose()?;
    let mut common: Common = merge(&cli.common, file.as_ref(), "common")?;
    common.resolve(name);
    common.validate()?;

    let start = Instant::now();
    let report = commands::execute(&cli.command, file.as_ref(), &common)?;
    let wall = start.elapsed().as_secs_f64();

    let prefix = common.out.clone().unwrap();
    let csv = with_suffix(&prefix, ".csv");
    let meta = with_suffix(&prefix, ".meta.toml");
    let mut outputs = Outputs::new();
    outputs.write(&csv, &report.table.to_csv())?;
    if common.plot == Some(true) {
        outputs.write(&with_suffix(&prefix, ".gp"), &gnuplot_script(&csv, &report.plot))?;
    }

    let mut run = toml::Table::new();
    run.insert("command".into(), name.into());
    run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    run.insert("wall-time-s".into(), wall.into());
    if let Some(seed) = report.seed {
        run.insert("seed".into(), toml::Value::try_from(seed).map_err(|e| CliError::Io(e.to_string()))?);
    }
    let mut files: Vec<String> = outputs.paths().iter().map(|p| p.display().to_string()).collect();
    files.push(meta.display().to_string());
    run.insert("outputs".into(), files.into());
    let mut doc = toml::Table::new();
    doc.insert("run".into(), run.into());
    let common_table = toml::Table::try_from(&common).map_err(|e| CliError::Io(e.to_string()))?;
    doc.insert("common".into(), common_table.into());
    doc.insert(name.into(), report.options.into());
    let text = toml::to_string(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    outputs.write(&meta, &text)?;
    outputs.commit();

    for line in &report.summary {
        println!("{line}");
    }
    println!("wrote {} ({} rows)", csv.display(), report.table.rows.len());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
