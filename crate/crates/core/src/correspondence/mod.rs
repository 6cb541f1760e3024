//! Temporal patch correspondence between tube frames.
//!
//! For every pixel of a source frame, matching scans a dilated square
//! window in a target frame and keeps the K nearest patches under a hard
//! distance threshold. Which frame pairs get matched is decided by a
//! connection scheme over the tube.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::video::Tube;

pub mod accuracy;
pub mod bruteforce;
pub mod io;
mod matching;

pub use accuracy::{correspondence_accuracy, per_pair_accuracy, PairAccuracy};
pub use bruteforce::find_matches_bruteforce;
pub use io::{load_matchset, save_matchset};
pub use matching::{extract_patch, find_matches, patch_distance, PatchDistance};

/// Patch comparison metric. `L2` is the RMS of elementwise differences,
/// `L1` the mean absolute difference, and `Ncc` maps normalized
/// cross-correlation into a distance via `(1 - ncc) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L1,
    L2,
    Ncc,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Metric::L1),
            "l2" => Ok(Metric::L2),
            "ncc" => Ok(Metric::Ncc),
            other => Err(Error::invalid_config(format!(
                "unknown metric {other:?}, expected l1, l2, or ncc"
            ))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::L1 => write!(f, "l1"),
            Metric::L2 => write!(f, "l2"),
            Metric::Ncc => write!(f, "ncc"),
        }
    }
}

/// How frame pairs of a tube are connected for matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectionScheme {
    /// Every ordered pair `(t, t̂)` with `t < t̂`: `T(T-1)/2` connections.
    Dense,
    /// Adjacent pairs only: `T-1` connections.
    Sequential,
    /// Adjacent pairs plus the wrap-around `(T-1, 0)`: `T` connections.
    Cyclic,
}

impl FromStr for ConnectionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dense" => Ok(ConnectionScheme::Dense),
            "sequential" => Ok(ConnectionScheme::Sequential),
            "cyclic" => Ok(ConnectionScheme::Cyclic),
            other => Err(Error::invalid_config(format!(
                "unknown scheme {other:?}, expected dense, sequential, or cyclic"
            ))),
        }
    }
}

impl fmt::Display for ConnectionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConnectionScheme::Dense => write!(f, "dense"),
            ConnectionScheme::Sequential => write!(f, "sequential"),
            ConnectionScheme::Cyclic => write!(f, "cyclic"),
        }
    }
}

/// Frame pairs `(source, target)` to match under the given scheme.
pub fn build_tube_connections(
    n_frames: usize,
    scheme: ConnectionScheme,
) -> Result<Vec<(usize, usize)>> {
    if n_frames < 2 {
        return Err(Error::TubeTooShort { frames: n_frames });
    }
    let pairs = match scheme {
        ConnectionScheme::Dense => {
            let mut v = Vec::with_capacity(n_frames * (n_frames - 1) / 2);
            for t in 0..n_frames {
                for u in t + 1..n_frames {
                    v.push((t, u));
                }
            }
            v
        }
        ConnectionScheme::Sequential => (0..n_frames - 1).map(|t| (t, t + 1)).collect(),
        ConnectionScheme::Cyclic => (0..n_frames).map(|t| (t, (t + 1) % n_frames)).collect(),
    };
    Ok(pairs)
}

/// Matching parameters. Defaults: 3x3 patches, radius 5 at dilation 3,
/// up to 5 matches below distance 0.05 under the L2 metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatchConfig {
    /// Side length of the square patch; odd.
    pub patch_size: u32,
    /// Search radius in grid steps, so candidates reach `radius * dilation`
    /// pixels from the source in Chebyshev distance.
    pub radius: u32,
    /// K: maximum matches kept per pixel.
    pub max_matches: u32,
    /// D: hard threshold; only strictly smaller distances are kept.
    pub distance_threshold: f64,
    /// Pixel stride between candidate offsets.
    pub dilation: u32,
    pub metric: Metric,
}

impl Default for PatchConfig {
    fn default() -> Self {
        PatchConfig {
            patch_size: 3,
            radius: 5,
            max_matches: 5,
            distance_threshold: 0.05,
            dilation: 3,
            metric: Metric::L2,
        }
    }
}

impl PatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 || self.patch_size.is_multiple_of(2) {
            return Err(Error::invalid_config(format!(
                "patch_size must be odd and positive, got {}",
                self.patch_size
            )));
        }
        if self.max_matches == 0 {
            return Err(Error::invalid_config("max_matches must be at least 1"));
        }
        if self.max_matches > 255 {
            return Err(Error::invalid_config(
                "max_matches above 255 cannot be serialized",
            ));
        }
        if !self.distance_threshold.is_finite() || self.distance_threshold < 0.0 {
            return Err(Error::invalid_config(format!(
                "distance_threshold must be finite and non-negative, got {}",
                self.distance_threshold
            )));
        }
        if self.dilation == 0 {
            return Err(Error::invalid_config("dilation must be at least 1"));
        }
        Ok(())
    }
}

/// One temporal match: target pixel coordinates and patch distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub x: u32,
    pub y: u32,
    pub distance: f64,
}

/// All matches from one source frame into one target frame. Per-pixel
/// lists are sorted by ascending distance and never longer than K.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    pub source: usize,
    pub target: usize,
    pub height: usize,
    pub width: usize,
    /// K this set was built with; bounds every per-pixel list.
    pub k: u32,
    lists: Vec<Vec<Match>>,
}

impl MatchSet {
    pub(crate) fn new(
        source: usize,
        target: usize,
        height: usize,
        width: usize,
        k: u32,
        lists: Vec<Vec<Match>>,
    ) -> MatchSet {
        debug_assert_eq!(lists.len(), height * width);
        MatchSet { source, target, height, width, k, lists }
    }

    /// Matches of the source pixel `(x, y)`.
    pub fn at(&self, x: usize, y: usize) -> &[Match] {
        &self.lists[y * self.width + x]
    }

    /// Per-pixel lists in row-major order.
    pub fn lists(&self) -> &[Vec<Match>] {
        &self.lists
    }

    /// Total number of matches across all pixels.
    pub fn n_matches(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }

    /// Serialized size in bytes; doubles as the storage estimate reported
    /// by ablation runs.
    pub fn storage_bytes(&self) -> usize {
        16 + 20 + self.lists.len() + 8 * self.n_matches()
    }
}

/// Runs matching over every connection of the tube under `scheme`.
pub fn compute_tube_matches(
    tube: &Tube,
    config: &PatchConfig,
    scheme: ConnectionScheme,
) -> Result<Vec<MatchSet>> {
    let connections = build_tube_connections(tube.n_frames(), scheme)?;
    connections
        .into_iter()
        .map(|(t, u)| {
            let mut ms = find_matches(tube.frame(t), tube.frame(u), config)?;
            ms.source = t;
            ms.target = u;
            Ok(ms)
        })
        .collect()
}
