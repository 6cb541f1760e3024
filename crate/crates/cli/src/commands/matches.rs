//! `mfvis match`: compute temporal patch matches over a tube's connection
//! graph, store them, and report per-pair statistics. When the tube ships
//! ground-truth masks, each pair also gets an instance-agreement accuracy.

use std::path::PathBuf;

use clap::Args;
use ndarray::Array2;
use serde::Serialize;

use mfvis_core::correspondence::{
    build_tube_connections, compute_tube_matches, per_pair_accuracy, save_matchset,
};
use mfvis_core::video::load_tube;

use super::{ensure_dir, print_json};
use crate::config::{self, CommonFlags, PatchFlags};
use crate::overlay;

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Tube directory to match over.
    #[arg(long)]
    pub tube: PathBuf,
    /// Directory for match files and the report.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
    #[command(flatten)]
    pub patch: PatchFlags,
    /// Also write per-pair agreement PNGs.
    #[arg(long)]
    pub overlays: bool,
}

#[derive(Serialize)]
struct PairSummary {
    source: usize,
    target: usize,
    n_matches: usize,
    storage_bytes: usize,
    accuracy: Option<f64>,
}

#[derive(Serialize)]
struct MatchReport {
    scheme: String,
    pairs: Vec<PairSummary>,
    mean_accuracy: Option<f64>,
    total_storage_bytes: usize,
}

pub fn run(args: MatchArgs) -> anyhow::Result<()> {
    let file = config::load_file(args.common.config.as_deref())?;
    let patch = config::resolve_patch(&file, &args.patch);
    let scheme = config::resolve_scheme(&file, args.common.scheme);
    patch.validate()?;

    let tube = load_tube(&args.tube)?;
    build_tube_connections(tube.n_frames(), scheme)?;
    let match_sets = compute_tube_matches(&tube, &patch, scheme)?;
    ensure_dir(&args.out)?;

    let labels: Option<Vec<Array2<u8>>> = if tube.gt_masks().is_some() {
        Some(
            (0..tube.n_frames())
                .map(|t| tube.instance_labels(t))
                .collect::<Result<_, _>>()?,
        )
    } else {
        None
    };

    let accuracies = match &labels {
        Some(labels) => per_pair_accuracy(&match_sets, labels)?
            .iter()
            .map(|p| p.fraction())
            .collect(),
        None => vec![None; match_sets.len()],
    };

    let mut pairs = Vec::with_capacity(match_sets.len());
    for (ms, accuracy) in match_sets.iter().zip(&accuracies) {
        let name = format!("matches_{:04}_{:04}.bin", ms.source, ms.target);
        save_matchset(&args.out.join(name), ms)?;
        if args.overlays {
            let overlay_name = format!("overlay_{:04}_{:04}.png", ms.source, ms.target);
            overlay::save_match_overlay(
                &args.out.join(overlay_name),
                ms,
                labels.as_ref().map(|l| &l[ms.source]),
                labels.as_ref().map(|l| &l[ms.target]),
            )?;
        }
        pairs.push(PairSummary {
            source: ms.source,
            target: ms.target,
            n_matches: ms.n_matches(),
            storage_bytes: ms.storage_bytes(),
            accuracy: *accuracy,
        });
    }

    let scored: Vec<f64> = accuracies.iter().flatten().copied().collect();
    let mean_accuracy =
        (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
    let report = MatchReport {
        scheme: scheme.to_string(),
        total_storage_bytes: pairs.iter().map(|p| p.storage_bytes).sum(),
        pairs,
        mean_accuracy,
    };
    std::fs::write(args.out.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    print_json(&report)
}
