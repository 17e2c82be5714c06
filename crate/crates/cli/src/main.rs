//! `isoclust`: benchmark K-Means, enhanced K-Means, AGMFI and EAGMFI on a
//! gene-expression matrix and report silhouette / SSE comparisons.

mod bench;
mod config;
mod error;
mod report;
mod synth_cmd;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{resolve, Mode, RunArgs};
use crate::error::CliError;
use crate::synth_cmd::SynthArgs;

#[derive(Debug, Parser)]
#[command(name = "isoclust", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one algorithm over the seed list.
    Run {
        /// kmeans, kmeans-enhanced, agmfi or eagmfi.
        #[arg(long)]
        algo: Option<String>,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Run all four algorithms and print one comparison table.
    Compare {
        #[command(flatten)]
        args: RunArgs,
    },
    /// Write a Gaussian blob data set as TSV.
    Synth(SynthArgs),
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Run(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Run(e.to_string())),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let spec = match cli.command {
        Command::Synth(s) => {
            let (matrix, labels) = synth_cmd::synth(&s)?;
            write_out(s.output.as_deref(), &matrix)?;
            if let Some(p) = &s.labels {
                write_out(Some(p), &labels)?;
            }
            return Ok(());
        }
        Command::Run { algo, args } => resolve(args, Mode::Run(algo))?,
        Command::Compare { args } => resolve(args, Mode::Compare)?,
    };
    let report = bench::execute(&spec, &mut |msg| eprintln!("note: {msg}"))?;
    write_out(spec.output.as_deref(), &report.render(spec.format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
