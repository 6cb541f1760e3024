//! Command-line driver for the mfvis library.
//!
//! Subcommands cover the whole workflow: `gen` renders synthetic tubes,
//! `match` runs temporal patch matching, `loss` evaluates the combined
//! loss for a stored mask field, `train` optimizes masks from boxes,
//! `assign` matches predictions to ground-truth tracks, and `ablate`
//! sweeps one parameter and tabulates the outcomes.
//!
//! Exit codes: 0 on success, 2 for invalid configuration or flags, 3 when
//! training diverges, 1 for any other failure such as unreadable inputs.

mod commands;
mod config;
mod overlay;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "mfvis", version, about = "Box-supervised video mask toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic tube described by the config file.
    Gen(commands::gen::GenArgs),
    /// Compute temporal patch matches for a tube.
    Match(commands::matches::MatchArgs),
    /// Evaluate the combined loss of a mask field against a tube.
    Loss(commands::loss::LossArgs),
    /// Optimize a mask field from box supervision.
    Train(commands::train::TrainCmdArgs),
    /// Assign predicted instances to ground-truth tracks.
    Assign(commands::assign::AssignArgs),
    /// Sweep one parameter across training runs and tabulate results.
    Ablate(commands::ablate::AblateArgs),
}

/// Honor `MFVIS_THREADS` before any parallel work starts.
fn setup_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("MFVIS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        mfvis_core::Error::InvalidConfig(format!("MFVIS_THREADS must be a positive integer, got {raw:?}"))
    })?;
    if n == 0 {
        return Err(mfvis_core::Error::InvalidConfig(
            "MFVIS_THREADS must be at least 1".to_string(),
        )
        .into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<mfvis_core::Error>() {
            return match core {
                mfvis_core::Error::Divergence { .. } => 3,
                mfvis_core::Error::InvalidConfig(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn main() {
    let cli = Cli::parse();
    let result = setup_threads().and_then(|()| match cli.command {
        Command::Gen(args) => commands::gen::run(args),
        Command::Match(args) => commands::matches::run(args),
        Command::Loss(args) => commands::loss::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Assign(args) => commands::assign::run(args),
        Command::Ablate(args) => commands::ablate::run(args),
    });
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}
