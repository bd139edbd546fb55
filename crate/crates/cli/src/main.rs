//! `bseries`: command-line front end for the bounded-series library.
//!
//! Exit codes: 0 success, 2 inconclusive at this precision, 1 error.

mod commands;
mod output;
mod series_args;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::commands::Command;
use crate::output::{Format, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "bseries", version, about = "Analysis of power series bounded on the real line")]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = bounded_series::DEFAULT_PRECISION)]
    precision: u32,
    /// Fixed truncation N (eval) or window end (analyze); automatic otherwise.
    #[arg(long, global = true)]
    trunc: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    parallel: Option<usize>,
    /// Seed for randomized sign rules given without an explicit seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                // clap uses 2 for usage errors; here 2 means "inconclusive".
                _ => ExitCode::from(1),
            };
        }
    };
    if cli.precision < 64 {
        eprintln!("error: --precision must be at least 64 bits");
        return ExitCode::from(1);
    }
    if let Some(n) = cli.parallel {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let cfg = RunConfig {
        precision: cli.precision,
        trunc: cli.trunc,
        format: cli.format,
        seed: cli.seed,
        parallel: cli.parallel,
        out: cli.out.clone(),
    };
    let result = commands::run(&cli.command, &cfg).and_then(|r| {
        r.emit(&cfg)?;
        Ok(r.status)
    });
    match result {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let inconclusive = e
                .downcast_ref::<bounded_series::Error>()
                .is_some_and(|x| x.is_inconclusive());
            ExitCode::from(if inconclusive { 2 } else { 1 })
        }
    }
}
