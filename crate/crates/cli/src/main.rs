//! `kls`: capacity-region data for secret-key agreement with hidden
//! identifiers.
//!
//! Exit status: 0 on success, 3 when a model exceeds the joint-size guard,
//! 2 for every other failure (bad flags, bad model files, unreadable or
//! unwritable paths).

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CompareArgs, CornerArgs, ExportArgs, RegionArgs, ReplayArgs};

#[derive(Parser)]
#[command(name = "kls", version, about = "Key-leakage-storage regions for hidden and visible source models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary triples of one region as CSV (`param,r_s,r_l,r_m`).
    Region(RegionArgs),
    /// Corner triples of two models and their percentage differences.
    Compare(CompareArgs),
    /// Corner triple with several encoder measurements.
    Corner(CornerArgs),
    /// CSV data behind the storage-leakage and key-leakage figures.
    ExportFigures(ExportArgs),
    /// Re-run a command recorded in a manifest.
    Replay(ReplayArgs),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let guard = err
        .chain()
        .any(|c| matches!(c.downcast_ref::<kls_core::Error>(), Some(kls_core::Error::SizeGuard { .. })));
    if guard {
        3
    } else {
        2
    }
}

#[cfg(feature = "parallel")]
fn configure_threads() -> anyhow::Result<()> {
    use anyhow::Context;
    if let Ok(v) = std::env::var("KLS_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("KLS_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() -> anyhow::Result<()> {
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Region(a) => commands::region(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Corner(a) => commands::corner(&a),
        Command::ExportFigures(a) => commands::export_figures(&a),
        Command::Replay(a) => commands::replay(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
