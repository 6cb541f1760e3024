//! One module per subcommand. Each exposes an args struct for clap and a
//! `run` function that does the work and prints a JSON summary to stdout.

pub mod ablate;
pub mod assign;
pub mod gen;
pub mod loss;
pub mod matches;
pub mod train;

use std::path::Path;

/// Creates `dir` (and parents) if needed and checks it is usable.
pub fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| anyhow::anyhow!("creating {}: {e}", dir.display()))
}

/// Prints a serializable value as pretty JSON on stdout.
pub fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}
