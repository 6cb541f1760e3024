//! Layered configuration: compiled defaults, then the JSON config file,
//! then command-line flags, each layer overriding the one below. Config
//! files are strict; unknown keys are rejected rather than ignored.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use serde::Deserialize;

use mfvis_core::correspondence::{ConnectionScheme, Metric, PatchConfig};
use mfvis_core::losses::LossWeights;
use mfvis_core::trainer::TrainConfig;
use mfvis_core::video::SyntheticSpec;
use mfvis_core::Error;

/// Top-level layout of a config file. Every section is optional; missing
/// sections fall back to compiled defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub synthetic: Option<SyntheticSpec>,
    pub patch: Option<PatchConfig>,
    pub weights: Option<LossWeights>,
    pub train: Option<TrainSection>,
    pub scheme: Option<ConnectionScheme>,
}

/// Training loop parameters as they appear in config files. Loss weights
/// and matching parameters live in their own sections.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub disable_pair: bool,
    pub disable_temp: bool,
    pub pair_in_box: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainSection {
            steps: d.steps,
            learning_rate: d.learning_rate,
            seed: d.seed,
            disable_pair: d.disable_pair,
            disable_temp: d.disable_temp,
            pair_in_box: d.pair_in_box,
        }
    }
}

pub fn load_file(path: Option<&Path>) -> anyhow::Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let parsed: FileConfig = serde_json::from_str(&text).map_err(|e| {
        Error::InvalidConfig(format!("config {}: {e}", path.display()))
    })?;
    Ok(parsed)
}

/// Matching flags shared by every subcommand that touches patch matching.
#[derive(Debug, Clone, Args)]
pub struct PatchFlags {
    /// Patch side length in pixels; odd.
    #[arg(long)]
    pub patch_size: Option<u32>,
    /// Search radius in grid steps.
    #[arg(long)]
    pub radius: Option<u32>,
    /// Maximum matches kept per pixel.
    #[arg(long)]
    pub k: Option<u32>,
    /// Patch distance threshold; only strictly smaller distances match.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Pixel stride between search candidates.
    #[arg(long)]
    pub dilation: Option<u32>,
    /// Patch distance metric: l1, l2, or ncc.
    #[arg(long)]
    pub metric: Option<Metric>,
}

impl PatchFlags {
    pub fn apply(&self, mut patch: PatchConfig) -> PatchConfig {
        if let Some(v) = self.patch_size {
            patch.patch_size = v;
        }
        if let Some(v) = self.radius {
            patch.radius = v;
        }
        if let Some(v) = self.k {
            patch.max_matches = v;
        }
        if let Some(v) = self.threshold {
            patch.distance_threshold = v;
        }
        if let Some(v) = self.dilation {
            patch.dilation = v;
        }
        if let Some(v) = self.metric {
            patch.metric = v;
        }
        patch
    }
}

/// Loss weight flags.
#[derive(Debug, Clone, Args)]
pub struct WeightFlags {
    /// Weight of the color-pairwise term.
    #[arg(long)]
    pub lambda_pair: Option<f64>,
    /// Weight of the temporal term.
    #[arg(long)]
    pub lambda_temp: Option<f64>,
    /// Color similarity threshold for pairwise edges.
    #[arg(long)]
    pub sigma_pixel: Option<f64>,
}

impl WeightFlags {
    pub fn apply(&self, mut weights: LossWeights) -> LossWeights {
        if let Some(v) = self.lambda_pair {
            weights.lambda_pair = v;
        }
        if let Some(v) = self.lambda_temp {
            weights.lambda_temp = v;
        }
        if let Some(v) = self.sigma_pixel {
            weights.sigma_pixel = v;
        }
        weights
    }
}

/// Training loop flags.
#[derive(Debug, Clone, Args)]
pub struct TrainFlags {
    /// Number of gradient steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Gradient descent step size.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Seed for mask initialization.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Drop the color-pairwise term.
    #[arg(long)]
    pub disable_pair: bool,
    /// Drop the temporal term.
    #[arg(long)]
    pub disable_temp: bool,
    /// Keep only color edges touching a ground-truth box.
    #[arg(long)]
    pub pair_in_box: bool,
}

/// Flags common to subcommands that read a config file and a tube.
#[derive(Debug, Clone, Args)]
pub struct CommonFlags {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Tube connection scheme: dense, sequential, or cyclic.
    #[arg(long)]
    pub scheme: Option<ConnectionScheme>,
}

pub fn resolve_patch(file: &FileConfig, flags: &PatchFlags) -> PatchConfig {
    flags.apply(file.patch.unwrap_or_default())
}

pub fn resolve_weights(file: &FileConfig, flags: &WeightFlags) -> LossWeights {
    flags.apply(file.weights.unwrap_or_default())
}

pub fn resolve_scheme(file: &FileConfig, flag: Option<ConnectionScheme>) -> ConnectionScheme {
    flag.or(file.scheme).unwrap_or(ConnectionScheme::Cyclic)
}

pub fn resolve_train(
    file: &FileConfig,
    patch: &PatchFlags,
    weights: &WeightFlags,
    train: &TrainFlags,
    scheme: Option<ConnectionScheme>,
) -> TrainConfig {
    let section = file.train.clone().unwrap_or_default();
    TrainConfig {
        steps: train.steps.unwrap_or(section.steps),
        learning_rate: train.lr.unwrap_or(section.learning_rate),
        weights: resolve_weights(file, weights),
        patch: resolve_patch(file, patch),
        scheme: resolve_scheme(file, scheme),
        seed: train.seed.unwrap_or(section.seed),
        disable_pair: train.disable_pair || section.disable_pair,
        disable_temp: train.disable_temp || section.disable_temp,
        pair_in_box: train.pair_in_box || section.pair_in_box,
    }
}
