//! `wta-lab`: build WTA networks, run trials, sweeps, exact oracles and
//! lemma checks. Every command writes its outputs and a `manifest.json`
//! into `--out`; `wta-lab replay <manifest>` reruns it byte for byte.
//!
//! Exit codes: 0 success, 1 a requested check failed or I/O failed,
//! 2 usage, 3 validation, 4 state space too large.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wta_core::Error;

mod args;
mod commands;
mod manifest;

use commands::{execute, Command};

#[derive(Parser, Debug)]
#[command(name = "wta-lab", version, about = "Stochastic spiking winner-take-all lab")]
struct Cli {
    /// Output directory. Default: `results`, or the manifest's directory for replay.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::StateSpaceTooLarge { .. }) => 4,
        Some(
            Error::InvalidSize(_)
            | Error::InvalidGamma(_)
            | Error::MissingDelta
            | Error::InvalidParameter(_)
            | Error::LengthMismatch { .. }
            | Error::HorizonTooShort { .. }
            | Error::UnknownLemma(_)
            | Error::VariantMismatch { .. },
        ) => 2,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli.command, cli.out.as_deref()) {
        Ok(o) if o.pass => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
