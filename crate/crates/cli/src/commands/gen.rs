//! `mfvis gen`: render the synthetic tube described by the config file
//! into a tube directory (frames, label maps, metadata).

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use mfvis_core::video::{generate_synthetic_tube, save_tube};
use mfvis_core::Error;

use super::{ensure_dir, print_json};
use crate::config;

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Config file with a `synthetic` section.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory the tube is written into.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Serialize)]
struct GenSummary {
    out: PathBuf,
    frames: usize,
    instances: usize,
    height: usize,
    width: usize,
    seed: u64,
}

pub fn run(args: GenArgs) -> anyhow::Result<()> {
    let file = config::load_file(Some(&args.config))?;
    let mut spec = file.synthetic.ok_or_else(|| {
        Error::InvalidConfig(format!(
            "config {} has no `synthetic` section",
            args.config.display()
        ))
    })?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let tube = generate_synthetic_tube(&spec)?;
    ensure_dir(&args.out)?;
    save_tube(&args.out, &tube)?;
    print_json(&GenSummary {
        out: args.out,
        frames: tube.n_frames(),
        instances: tube.n_instances(),
        height: tube.height(),
        width: tube.width(),
        seed: spec.seed,
    })
}
