//! `mfvis ablate`: run training once per value of a swept parameter and
//! tabulate quality, loss, runtime, and matching footprint as CSV.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};

use mfvis_core::correspondence::{build_tube_connections, compute_tube_matches};
use mfvis_core::trainer::{evaluate_iou, train, TrainConfig};
use mfvis_core::video::{load_tube, Tube};
use mfvis_core::Error;

use crate::config::{self, CommonFlags, PatchFlags, TrainFlags, WeightFlags};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AblateParam {
    PatchSize,
    Radius,
    K,
    Threshold,
    Dilation,
    Metric,
    Scheme,
    LambdaPair,
    LambdaTemp,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Tube directory to train on.
    #[arg(long)]
    pub tube: PathBuf,
    /// CSV file collecting one row per swept value.
    #[arg(long)]
    pub out: PathBuf,
    /// Parameter to sweep.
    #[arg(long, value_enum)]
    pub param: AblateParam,
    /// Comma-separated values for the swept parameter.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<String>,
    #[command(flatten)]
    pub common: CommonFlags,
    #[command(flatten)]
    pub patch: PatchFlags,
    #[command(flatten)]
    pub weights: WeightFlags,
    #[command(flatten)]
    pub train: TrainFlags,
}

fn parse<T: std::str::FromStr>(raw: &str, what: &str) -> anyhow::Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e| {
        Error::InvalidConfig(format!("cannot parse {raw:?} as {what}: {e}")).into()
    })
}

fn apply(config: &mut TrainConfig, param: AblateParam, raw: &str) -> anyhow::Result<()> {
    match param {
        AblateParam::PatchSize => config.patch.patch_size = parse(raw, "patch size")?,
        AblateParam::Radius => config.patch.radius = parse(raw, "radius")?,
        AblateParam::K => config.patch.max_matches = parse(raw, "match count")?,
        AblateParam::Threshold => config.patch.distance_threshold = parse(raw, "threshold")?,
        AblateParam::Dilation => config.patch.dilation = parse(raw, "dilation")?,
        AblateParam::Metric => config.patch.metric = parse(raw, "metric")?,
        AblateParam::Scheme => config.scheme = parse(raw, "scheme")?,
        AblateParam::LambdaPair => config.weights.lambda_pair = parse(raw, "weight")?,
        AblateParam::LambdaTemp => config.weights.lambda_temp = parse(raw, "weight")?,
    }
    Ok(())
}

/// Match storage footprint and connection count for a configuration, zero
/// when the temporal term is off.
fn match_stats(tube: &Tube, config: &TrainConfig) -> anyhow::Result<(usize, usize)> {
    if config.disable_temp || config.weights.lambda_temp == 0.0 {
        return Ok((0, 0));
    }
    let connections = build_tube_connections(tube.n_frames(), config.scheme)?;
    let sets = compute_tube_matches(tube, &config.patch, config.scheme)?;
    let bytes = sets.iter().map(|s| s.storage_bytes()).sum();
    Ok((connections.len(), bytes))
}

pub fn run(args: AblateArgs) -> anyhow::Result<()> {
    if args.values.is_empty() {
        return Err(Error::InvalidConfig("--values must list at least one value".to_string()).into());
    }
    let file = config::load_file(args.common.config.as_deref())?;
    let base = config::resolve_train(
        &file,
        &args.patch,
        &args.weights,
        &args.train,
        args.common.scheme,
    );
    let tube = load_tube(&args.tube)?;

    let mut csv = String::from(
        "param,value,mean_iou,l_proj,l_pair,l_temp,l_seg,wall_time_s,n_connections,match_bytes\n",
    );
    let param_name = args
        .param
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    for raw in &args.values {
        let mut config = base.clone();
        apply(&mut config, args.param, raw)?;
        config.validate()?;

        let started = Instant::now();
        let outcome = train(&tube, tube.n_instances(), &config)?;
        let wall_time = started.elapsed().as_secs_f64();
        let mean_iou = match tube.gt_masks() {
            Some(_) => evaluate_iou(&outcome.masks, &tube, 0.5)?.mean,
            None => f64::NAN,
        };
        let (n_connections, match_bytes) = match_stats(&tube, &config)?;
        let last = outcome.log.last().expect("log always has a final record");
        writeln!(
            csv,
            "{param_name},{raw},{mean_iou:.6},{:.6},{:.6},{:.6},{:.6},{wall_time:.3},{n_connections},{match_bytes}",
            last.l_proj, last.l_pair, last.l_temp, last.l_seg
        )?;
    }
    std::fs::write(&args.out, &csv)?;
    print!("{csv}");
    Ok(())
}
