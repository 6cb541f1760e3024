//! Patch extraction, patch distances, and windowed KNN matching.

use rayon::prelude::*;

use crate::correspondence::{Match, MatchSet, Metric, PatchConfig};
use crate::error::{Error, Result};
use crate::video::Frame;

/// Lab patch around `(x, y)`: `patch_size^2 * 3` values, rows top to
/// bottom, channels interleaved per pixel. Coordinates outside the frame
/// clamp to the nearest edge pixel.
pub fn extract_patch(frame: &Frame, x: usize, y: usize, patch_size: u32) -> Vec<f64> {
    let r = (patch_size / 2) as i64;
    let (h, w) = (frame.height() as i64, frame.width() as i64);
    let mut out = Vec::with_capacity((patch_size * patch_size * 3) as usize);
    for dy in -r..=r {
        let sy = (y as i64 + dy).clamp(0, h - 1) as usize;
        for dx in -r..=r {
            let sx = (x as i64 + dx).clamp(0, w - 1) as usize;
            let lab = frame.lab_at(sx, sy);
            out.extend_from_slice(&lab);
        }
    }
    out
}

/// Distance between two equally sized patch vectors, with a flag marking
/// the NCC zero-variance fallback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchDistance {
    pub value: f64,
    /// True only for NCC when either patch has zero variance; the value is
    /// then pinned to 0.5 (uncorrelated).
    pub degenerate: bool,
}

pub fn patch_distance(a: &[f64], b: &[f64], metric: Metric) -> PatchDistance {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    match metric {
        Metric::L2 => {
            let sum_sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            PatchDistance { value: (sum_sq / n).sqrt(), degenerate: false }
        }
        Metric::L1 => {
            let sum_abs: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
            PatchDistance { value: sum_abs / n, degenerate: false }
        }
        Metric::Ncc => {
            let mean_a: f64 = a.iter().sum::<f64>() / n;
            let mean_b: f64 = b.iter().sum::<f64>() / n;
            let mut dot = 0.0;
            let mut var_a = 0.0;
            let mut var_b = 0.0;
            for (x, y) in a.iter().zip(b) {
                let (ca, cb) = (x - mean_a, y - mean_b);
                dot += ca * cb;
                var_a += ca * ca;
                var_b += cb * cb;
            }
            // A constant patch accumulates ~1e-31 of rounding dust instead
            // of an exact zero variance, so flatness needs a tolerance.
            // Real texture in normalized Lab sits many orders above it.
            const VAR_EPS: f64 = 1e-20;
            if var_a <= VAR_EPS || var_b <= VAR_EPS {
                return PatchDistance { value: 0.5, degenerate: true };
            }
            let ncc = (dot / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0);
            PatchDistance { value: (1.0 - ncc) / 2.0, degenerate: false }
        }
    }
}

/// KNN patch matching from every pixel of `source` into `target`.
///
/// Candidates sit at `(x, y) + dilation * (dx, dy)` for `|dx|, |dy| <=
/// radius`; out-of-frame candidates are dropped. A candidate survives only
/// with distance strictly below the threshold; survivors are sorted by
/// ascending distance (ties keep window scan order, rows first) and cut to
/// the best K.
pub fn find_matches(source: &Frame, target: &Frame, config: &PatchConfig) -> Result<MatchSet> {
    config.validate()?;
    let (h, w) = (source.height(), source.width());
    if target.height() != h || target.width() != w {
        return Err(Error::dim(format!(
            "source frame {h}x{w} vs target {}x{}",
            target.height(),
            target.width()
        )));
    }

    // Patches are reused across every candidate comparison, so build both
    // tables up front.
    let patch_table = |frame: &Frame| -> Vec<Vec<f64>> {
        (0..h * w)
            .map(|i| extract_patch(frame, i % w, i / w, config.patch_size))
            .collect()
    };
    let source_patches = patch_table(source);
    let target_patches = patch_table(target);

    let r = config.radius as i64;
    let dil = config.dilation as i64;
    let k = config.max_matches as usize;

    let lists: Vec<Vec<Match>> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| {
            let source_patches = &source_patches;
            let target_patches = &target_patches;
            (0..w).map(move |x| {
                let patch = &source_patches[y * w + x];
                let mut kept: Vec<Match> = Vec::new();
                for dy in -r..=r {
                    let ty = y as i64 + dil * dy;
                    if ty < 0 || ty >= h as i64 {
                        continue;
                    }
                    for dx in -r..=r {
                        let tx = x as i64 + dil * dx;
                        if tx < 0 || tx >= w as i64 {
                            continue;
                        }
                        let candidate = &target_patches[ty as usize * w + tx as usize];
                        let d = patch_distance(patch, candidate, config.metric);
                        if d.value < config.distance_threshold {
                            kept.push(Match {
                                x: tx as u32,
                                y: ty as u32,
                                distance: d.value,
                            });
                        }
                    }
                }
                kept.sort_by(|a, b| a.distance.partial_cmp(&b.distance).unwrap());
                kept.truncate(k);
                kept
            })
        })
        .collect();

    Ok(MatchSet::new(0, 1, h, w, config.max_matches, lists))
}
