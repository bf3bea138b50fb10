//! Command-line front end: envelope and coherence tables, figure presets and
//! the validation suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod validate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::write_text;
use crate::presets::Kind;
use crate::validate::{Level, Options};

#[derive(Debug, Parser)]
#[command(name = "chopper", version, about = "Photon scattering off a periodically modulated emitter")]
pub struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-photon envelope A(τc) over one period.
    Envelope(RunArgs),
    /// Two-photon coherences g2_ll and g2_rr on a (τc, τd) grid.
    G2(RunArgs),
    /// Run the invariant suite and write a JSON report.
    Validate {
        #[arg(value_enum, default_value = "quick")]
        level: Level,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        corrupt_fosc: Option<f64>,
    },
    /// Write the tables behind one of the figures.
    Figure {
        preset: String,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the output path of the configuration; stdout if neither is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn run_table(args: &RunArgs, build: fn(&RunConfig) -> Result<output::Artifact, CliError>) -> Result<i32, CliError> {
    let cfg = RunConfig::load(&args.config)?;
    let format = args.format.unwrap_or(cfg.format);
    let text = build(&cfg)?.render(format)?;
    let out = args.out.clone().or_else(|| cfg.output.clone());
    write_text(&text, out.as_deref())?;
    Ok(0)
}

fn dispatch(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Envelope(args) => run_table(args, commands::envelope),
        Command::G2(args) => run_table(args, commands::g2),
        Command::Validate { level, out, corrupt_fosc } => {
            let report = validate::run(*level, Options { corrupt_fosc: *corrupt_fosc })?;
            for c in &report.checks {
                eprintln!("{} {} = {:.3e}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.measured);
            }
            let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?;
            text.push('\n');
            write_text(&text, out.as_deref())?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Figure { preset, out, format } => {
            for run in presets::find(preset)?.runs() {
                let format = format.unwrap_or(run.config.format);
                let artifact = match run.kind {
                    Kind::Envelope => commands::envelope(&run.config)?,
                    Kind::G2 => commands::g2(&run.config)?,
                };
                let path = out.join(format!("{}.{}", run.stem, format.extension()));
                write_text(&artifact.render(format)?, Some(&path))?;
                eprintln!("wrote {}", path.display());
            }
            Ok(0)
        }
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(CliError::Config(e.to_string())),
        },
        None => dispatch(&cli.command),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
