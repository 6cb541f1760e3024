//! Exhaustive reference matcher.
//!
//! This module deliberately shares no code with the production matcher:
//! patches are re-extracted with plain index arithmetic, distances are
//! recomputed inline, candidates are found by scanning the whole target
//! frame, and selection uses repeated minimum scans instead of a sort. Its
//! only job is to disagree with `find_matches` when one of them is wrong.

use crate::correspondence::{Match, MatchSet, Metric, PatchConfig};
use crate::error::{Error, Result};
use crate::video::Frame;

fn lab_at_clamped(frame: &Frame, x: i64, y: i64, c: usize) -> f64 {
    let cx = x.clamp(0, frame.width() as i64 - 1) as usize;
    let cy = y.clamp(0, frame.height() as i64 - 1) as usize;
    frame.lab()[[cy, cx, c]]
}

fn raw_distance(
    source: &Frame,
    target: &Frame,
    sx: usize,
    sy: usize,
    tx: usize,
    ty: usize,
    cfg: &PatchConfig,
) -> f64 {
    let r = (cfg.patch_size / 2) as i64;
    let count = (cfg.patch_size * cfg.patch_size * 3) as f64;
    match cfg.metric {
        Metric::L2 => {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    for c in 0..3 {
                        let a = lab_at_clamped(source, sx as i64 + dx, sy as i64 + dy, c);
                        let b = lab_at_clamped(target, tx as i64 + dx, ty as i64 + dy, c);
                        acc += (a - b) * (a - b);
                    }
                }
            }
            (acc / count).sqrt()
        }
        Metric::L1 => {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    for c in 0..3 {
                        let a = lab_at_clamped(source, sx as i64 + dx, sy as i64 + dy, c);
                        let b = lab_at_clamped(target, tx as i64 + dx, ty as i64 + dy, c);
                        acc += (a - b).abs();
                    }
                }
            }
            acc / count
        }
        Metric::Ncc => {
            let mut sum_a = 0.0;
            let mut sum_b = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    for c in 0..3 {
                        sum_a += lab_at_clamped(source, sx as i64 + dx, sy as i64 + dy, c);
                        sum_b += lab_at_clamped(target, tx as i64 + dx, ty as i64 + dy, c);
                    }
                }
            }
            let (mean_a, mean_b) = (sum_a / count, sum_b / count);
            let mut dot = 0.0;
            let mut var_a = 0.0;
            let mut var_b = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    for c in 0..3 {
                        let a = lab_at_clamped(source, sx as i64 + dx, sy as i64 + dy, c) - mean_a;
                        let b = lab_at_clamped(target, tx as i64 + dx, ty as i64 + dy, c) - mean_b;
                        dot += a * b;
                        var_a += a * a;
                        var_b += b * b;
                    }
                }
            }
            if var_a == 0.0 || var_b == 0.0 {
                0.5
            } else {
                let ncc = (dot / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0);
                (1.0 - ncc) / 2.0
            }
        }
    }
}

/// Same contract as `find_matches`, computed the slow way.
pub fn find_matches_bruteforce(
    source: &Frame,
    target: &Frame,
    config: &PatchConfig,
) -> Result<MatchSet> {
    config.validate()?;
    let (h, w) = (source.height(), source.width());
    if target.height() != h || target.width() != w {
        return Err(Error::dim(format!(
            "source frame {h}x{w} vs target {}x{}",
            target.height(),
            target.width()
        )));
    }
    let reach = (config.radius * config.dilation) as i64;
    let dil = config.dilation as i64;

    let mut lists = Vec::with_capacity(h * w);
    for sy in 0..h {
        for sx in 0..w {
            // Candidates: every frame pixel on the dilation grid within
            // Chebyshev reach, in row-major target order (which is the same
            // order the windowed scan visits them in).
            let mut pool: Vec<Match> = Vec::new();
            for ty in 0..h {
                let oy = ty as i64 - sy as i64;
                if oy.abs() > reach || oy.rem_euclid(dil) != 0 {
                    continue;
                }
                for tx in 0..w {
                    let ox = tx as i64 - sx as i64;
                    if ox.abs() > reach || ox.rem_euclid(dil) != 0 {
                        continue;
                    }
                    let d = raw_distance(source, target, sx, sy, tx, ty, config);
                    if d < config.distance_threshold {
                        pool.push(Match { x: tx as u32, y: ty as u32, distance: d });
                    }
                }
            }
            // Selection by repeated stable minimum scan.
            let mut picked = Vec::new();
            while picked.len() < config.max_matches as usize && !pool.is_empty() {
                let mut best = 0;
                for i in 1..pool.len() {
                    if pool[i].distance < pool[best].distance {
                        best = i;
                    }
                }
                picked.push(pool.remove(best));
            }
            lists.push(picked);
        }
    }
    Ok(MatchSet::new(0, 1, h, w, config.max_matches, lists))
}
