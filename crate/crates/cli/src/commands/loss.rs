//! `mfvis loss`: evaluate the combined loss of a stored mask field against
//! a tube and print the scalar breakdown as JSON. The full gradient can be
//! dumped to a volume file for offline inspection.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use mfvis_core::losses::total_loss;
use mfvis_core::video::{load_maskfield, load_tube, save_volume};

use super::print_json;
use crate::config::{self, CommonFlags, PatchFlags, WeightFlags};

#[derive(Debug, Args)]
pub struct LossArgs {
    /// Tube directory providing frames and boxes.
    #[arg(long)]
    pub tube: PathBuf,
    /// Mask field file to evaluate.
    #[arg(long)]
    pub mask: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
    #[command(flatten)]
    pub patch: PatchFlags,
    #[command(flatten)]
    pub weights: WeightFlags,
    /// Write the gradient of the total loss to this volume file.
    #[arg(long)]
    pub grad_dump: Option<PathBuf>,
}

#[derive(Serialize)]
struct LossSummary {
    l_proj: f64,
    l_pair: f64,
    l_temp: f64,
    l_spatial: f64,
    l_seg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    grad_dump: Option<PathBuf>,
}

pub fn run(args: LossArgs) -> anyhow::Result<()> {
    let file = config::load_file(args.common.config.as_deref())?;
    let patch = config::resolve_patch(&file, &args.patch);
    let weights = config::resolve_weights(&file, &args.weights);
    let scheme = config::resolve_scheme(&file, args.common.scheme);
    patch.validate()?;
    weights.validate()?;

    let tube = load_tube(&args.tube)?;
    let mask = load_maskfield(&args.mask)?;
    let report = total_loss(&mask, &tube, &patch, &weights, scheme)?;
    if let Some(path) = &args.grad_dump {
        save_volume(path, &report.grad)?;
    }
    print_json(&LossSummary {
        l_proj: report.l_proj,
        l_pair: report.l_pair,
        l_temp: report.l_temp,
        l_spatial: report.l_spatial,
        l_seg: report.l_seg,
        grad_dump: args.grad_dump,
    })
}
