//! `mfvis assign`: build a cost matrix between predicted mask instances
//! and ground-truth box tracks, solve the assignment, and print both as
//! JSON. The pooled spatio-temporal cost is the default; `--framewise`
//! switches to the per-frame box cost for comparison.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use mfvis_core::matching_cost::{
    cost_matrix_framewise, cost_matrix_st, hungarian_assign, SamplePolicy,
};
use mfvis_core::video::{load_maskfield, load_tube};
use mfvis_core::Error;

use super::print_json;

#[derive(Debug, Args)]
pub struct AssignArgs {
    /// Tube directory providing ground-truth tracks.
    #[arg(long)]
    pub tube: PathBuf,
    /// Mask field with the predictions to assign.
    #[arg(long)]
    pub mask: PathBuf,
    /// Mask binarization threshold.
    #[arg(long, default_value_t = 0.5)]
    pub bin_threshold: f64,
    /// Sampled points per frame for the pooled cost.
    #[arg(long, default_value_t = 1024)]
    pub points: usize,
    /// Seed for point sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample only inside the union of the compared boxes.
    #[arg(long)]
    pub in_box: bool,
    /// Use the per-frame box cost instead of the pooled cost.
    #[arg(long)]
    pub framewise: bool,
}

#[derive(Serialize)]
struct AssignSummary {
    method: &'static str,
    costs: Vec<Vec<f64>>,
    /// `pairs[row]` is the ground-truth column assigned to prediction
    /// `row`, or null when the row is left out.
    pairs: Vec<Option<usize>>,
    total_cost: f64,
}

pub fn run(args: AssignArgs) -> anyhow::Result<()> {
    if args.points == 0 {
        return Err(Error::InvalidConfig("--points must be at least 1".to_string()).into());
    }
    if !(0.0..=1.0).contains(&args.bin_threshold) {
        return Err(Error::InvalidConfig(format!(
            "--bin-threshold {} outside [0, 1]",
            args.bin_threshold
        ))
        .into());
    }
    let tube = load_tube(&args.tube)?;
    let mask = load_maskfield(&args.mask)?;

    let (method, matrix) = if args.framewise {
        ("framewise", cost_matrix_framewise(&mask, &tube, args.bin_threshold)?)
    } else {
        let policy = if args.in_box {
            SamplePolicy::InsideBoxes
        } else {
            SamplePolicy::WholeFrame
        };
        (
            "spatio-temporal",
            cost_matrix_st(&mask, &tube, args.bin_threshold, args.points, args.seed, policy)?,
        )
    };
    let assignment = hungarian_assign(&matrix)?;
    let costs = matrix
        .costs()
        .rows()
        .into_iter()
        .map(|r| r.to_vec())
        .collect();
    print_json(&AssignSummary {
        method,
        costs,
        pairs: assignment.pairs,
        total_cost: assignment.total_cost,
    })
}
