//! `mfvis train`: optimize a mask field for a tube from box supervision.
//! Writes the final mask field, a JSONL loss log, and (when ground truth
//! is available) an IoU report into the output directory.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use mfvis_core::trainer::{evaluate_iou, train, IouReport, TrainOutcome};
use mfvis_core::video::{load_tube, save_maskfield};

use super::{ensure_dir, print_json};
use crate::config::{self, CommonFlags, PatchFlags, TrainFlags, WeightFlags};
use crate::overlay;

/// Mask binarization threshold for IoU scoring and overlays.
const BIN_THRESHOLD: f64 = 0.5;

#[derive(Debug, Args)]
pub struct TrainCmdArgs {
    /// Tube directory to train on.
    #[arg(long)]
    pub tube: PathBuf,
    /// Directory for the mask field, log, and reports.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
    #[command(flatten)]
    pub patch: PatchFlags,
    #[command(flatten)]
    pub weights: WeightFlags,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Also write per-frame mask overlay PNGs.
    #[arg(long)]
    pub overlays: bool,
}

#[derive(Serialize)]
struct TrainSummary {
    steps: usize,
    initial_l_seg: f64,
    final_l_seg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    iou: Option<IouReport>,
}

fn write_artifacts(out: &Path, outcome: &TrainOutcome) -> anyhow::Result<()> {
    save_maskfield(&out.join("mask.bin"), &outcome.masks)?;
    let mut log = std::fs::File::create(out.join("train_log.jsonl"))?;
    for record in &outcome.log {
        writeln!(log, "{}", serde_json::to_string(record)?)?;
    }
    Ok(())
}

pub fn run(args: TrainCmdArgs) -> anyhow::Result<()> {
    let file = config::load_file(args.common.config.as_deref())?;
    let train_config = config::resolve_train(
        &file,
        &args.patch,
        &args.weights,
        &args.train,
        args.common.scheme,
    );
    train_config.validate()?;

    let tube = load_tube(&args.tube)?;
    let outcome = train(&tube, tube.n_instances(), &train_config)?;
    ensure_dir(&args.out)?;
    write_artifacts(&args.out, &outcome)?;

    let iou = match tube.gt_masks() {
        Some(_) => {
            let report = evaluate_iou(&outcome.masks, &tube, BIN_THRESHOLD)?;
            std::fs::write(
                args.out.join("iou_report.json"),
                serde_json::to_string_pretty(&report)?,
            )?;
            Some(report)
        }
        None => None,
    };

    if args.overlays {
        for t in 0..tube.n_frames() {
            let name = format!("overlay_{t:04}.png");
            overlay::save_mask_overlay(
                &args.out.join(name),
                &tube,
                &outcome.masks,
                t,
                BIN_THRESHOLD,
            )?;
        }
    }

    let summary = TrainSummary {
        steps: train_config.steps,
        initial_l_seg: outcome.initial_l_seg(),
        final_l_seg: outcome.final_l_seg(),
        iou,
    };
    std::fs::write(args.out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    print_json(&summary)
}
