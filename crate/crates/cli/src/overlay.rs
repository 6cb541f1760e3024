//! PNG visualizations for inspecting runs by eye. Nothing here feeds back
//! into any computation; encodings are chosen for legibility.

use std::path::Path;

use anyhow::Context;
use image::{GrayImage, RgbImage};
use ndarray::Array2;

use mfvis_core::correspondence::MatchSet;
use mfvis_core::video::{MaskField, Tube};

/// Instance tint colors for mask overlays.
const TINTS: [[u8; 3]; 8] = [
    [230, 60, 60],
    [60, 200, 80],
    [70, 110, 240],
    [240, 200, 60],
    [200, 70, 220],
    [60, 210, 210],
    [240, 140, 50],
    [150, 230, 60],
];

fn save_gray(path: &Path, values: &Array2<u8>) -> anyhow::Result<()> {
    let (h, w) = values.dim();
    let img = GrayImage::from_raw(w as u32, h as u32, values.iter().copied().collect())
        .expect("buffer length matches dimensions");
    img.save(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Grayscale agreement map for one match set: with labels, brightness is
/// the fraction of a pixel's matches that land on the same instance;
/// without, it is how full the pixel's match list is.
pub fn save_match_overlay(
    path: &Path,
    ms: &MatchSet,
    labels: Option<&Array2<u8>>,
    target_labels: Option<&Array2<u8>>,
) -> anyhow::Result<()> {
    let mut values = Array2::zeros((ms.height, ms.width));
    for y in 0..ms.height {
        for x in 0..ms.width {
            let matches = ms.at(x, y);
            let v = match (labels, target_labels) {
                (Some(src), Some(dst)) if !matches.is_empty() => {
                    let label = src[[y, x]];
                    let agree = matches
                        .iter()
                        .filter(|m| dst[[m.y as usize, m.x as usize]] == label)
                        .count();
                    (agree * 255 / matches.len()) as u8
                }
                _ => (matches.len() * 255 / ms.k.max(1) as usize) as u8,
            };
            values[[y, x]] = v;
        }
    }
    save_gray(path, &values)
}

/// Frame image with every binarized instance mask tinted on top.
pub fn save_mask_overlay(
    path: &Path,
    tube: &Tube,
    masks: &MaskField,
    t: usize,
    threshold: f64,
) -> anyhow::Result<()> {
    let frame = tube.frame(t);
    let (h, w) = (frame.height(), frame.width());
    let mut buf = Vec::with_capacity(h * w * 3);
    for y in 0..h {
        for x in 0..w {
            let mut px = [
                frame.rgb()[[y, x, 0]] as u16,
                frame.rgb()[[y, x, 1]] as u16,
                frame.rgb()[[y, x, 2]] as u16,
            ];
            for i in 0..masks.n_instances() {
                if masks.values()[[i, t, y, x]] >= threshold {
                    let tint = TINTS[i % TINTS.len()];
                    for c in 0..3 {
                        px[c] = (px[c] + tint[c] as u16) / 2;
                    }
                }
            }
            buf.extend(px.map(|v| v as u8));
        }
    }
    let img = RgbImage::from_raw(w as u32, h as u32, buf).expect("buffer length matches");
    img.save(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
