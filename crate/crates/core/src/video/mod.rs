//! Video tube data model: frames, boxes, ground truth, and soft masks.
//!
//! A tube is a short clip of `T` frames with per-frame, per-instance
//! bounding boxes and (for synthetic data) per-frame visible instance masks.
//! Frames keep both the 8-bit sRGB pixels they were loaded from and a
//! derived CIE Lab representation; the Lab view is what every matching and
//! loss computation consumes, while the sRGB view is what gets serialized.
//!
//! Pixel coordinates are `(x, y)` with `x` the column and `y` the row;
//! arrays are indexed `[y, x]`. Boxes are half-open: a box covers the pixel
//! columns `x_min..x_max` and rows `y_min..y_max`.

use ndarray::{Array2, Array3, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod color;
pub mod io;
pub mod synth;

pub use io::{load_maskfield, load_tube, load_volume, save_maskfield, save_tube, save_volume};
pub use synth::{generate_synthetic_tube, InstanceSpec, ShapeKind, SyntheticSpec};

/// Axis-aligned box in pixel coordinates, half-open on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl BoundingBox {
    pub fn new(x_min: u32, y_min: u32, x_max: u32, y_max: u32) -> Self {
        BoundingBox { x_min, y_min, x_max, y_max }
    }

    pub fn width(&self) -> u32 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> u32 {
        self.y_max - self.y_min
    }

    /// True when the pixel `(x, y)` lies inside the half-open extent.
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x_min && x < self.x_max && y >= self.y_min && y < self.y_max
    }

    fn check(&self, width: u32, height: u32) -> Result<()> {
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::dim(format!("degenerate box {self:?}")));
        }
        if self.x_max > width || self.y_max > height {
            return Err(Error::dim(format!(
                "box {self:?} exceeds frame {width}x{height}"
            )));
        }
        Ok(())
    }
}

/// One video frame: 8-bit sRGB pixels plus the derived normalized Lab view.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    rgb: Array3<u8>,
    lab: Array3<f64>,
}

impl Frame {
    /// Builds a frame from `(H, W, 3)` sRGB bytes, deriving Lab per pixel.
    pub fn from_rgb(rgb: Array3<u8>) -> Result<Frame> {
        let (h, w, c) = rgb.dim();
        if h == 0 || w == 0 || c != 3 {
            return Err(Error::dim(format!(
                "frame must be (H>=1, W>=1, 3), got ({h}, {w}, {c})"
            )));
        }
        let mut lab = Array3::zeros((h, w, 3));
        for y in 0..h {
            for x in 0..w {
                let px = color::rgb_to_lab([rgb[[y, x, 0]], rgb[[y, x, 1]], rgb[[y, x, 2]]]);
                for ch in 0..3 {
                    lab[[y, x, ch]] = px[ch];
                }
            }
        }
        Ok(Frame { rgb, lab })
    }

    pub fn height(&self) -> usize {
        self.rgb.dim().0
    }

    pub fn width(&self) -> usize {
        self.rgb.dim().1
    }

    /// Raw sRGB bytes, `(H, W, 3)`.
    pub fn rgb(&self) -> &Array3<u8> {
        &self.rgb
    }

    /// Normalized Lab channels in `[0, 1]`, `(H, W, 3)`.
    pub fn lab(&self) -> &Array3<f64> {
        &self.lab
    }

    /// Lab value of one pixel.
    pub fn lab_at(&self, x: usize, y: usize) -> [f64; 3] {
        [self.lab[[y, x, 0]], self.lab[[y, x, 1]], self.lab[[y, x, 2]]]
    }
}

/// A clip of frames with per-frame ground-truth boxes and optional masks.
///
/// `gt_boxes[t][i]` is the box of instance `i` at frame `t`; every frame
/// carries a box for every instance. `gt_masks`, when present, holds the
/// visible (mutually disjoint) instance masks as `(n_instances, T, H, W)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tube {
    frames: Vec<Frame>,
    gt_boxes: Vec<Vec<BoundingBox>>,
    gt_masks: Option<Array4<bool>>,
    spec: Option<SyntheticSpec>,
}

impl Tube {
    pub fn new(
        frames: Vec<Frame>,
        gt_boxes: Vec<Vec<BoundingBox>>,
        gt_masks: Option<Array4<bool>>,
    ) -> Result<Tube> {
        Self::with_spec(frames, gt_boxes, gt_masks, None)
    }

    pub(crate) fn with_spec(
        frames: Vec<Frame>,
        gt_boxes: Vec<Vec<BoundingBox>>,
        gt_masks: Option<Array4<bool>>,
        spec: Option<SyntheticSpec>,
    ) -> Result<Tube> {
        if frames.is_empty() {
            return Err(Error::dim("tube needs at least one frame".to_string()));
        }
        let (h, w) = (frames[0].height(), frames[0].width());
        if frames.iter().any(|f| f.height() != h || f.width() != w) {
            return Err(Error::dim("frames disagree on dimensions".to_string()));
        }
        if gt_boxes.len() != frames.len() {
            return Err(Error::dim(format!(
                "{} frames but {} box lists",
                frames.len(),
                gt_boxes.len()
            )));
        }
        let n = gt_boxes[0].len();
        for (t, per_frame) in gt_boxes.iter().enumerate() {
            if per_frame.len() != n {
                return Err(Error::dim(format!(
                    "frame {t} has {} boxes, frame 0 has {n}",
                    per_frame.len()
                )));
            }
            for b in per_frame {
                b.check(w as u32, h as u32)?;
            }
        }
        if let Some(masks) = &gt_masks {
            let dims = masks.dim();
            if dims != (n, frames.len(), h, w) {
                return Err(Error::dim(format!(
                    "gt_masks shape {dims:?} does not match ({n}, {}, {h}, {w})",
                    frames.len()
                )));
            }
        }
        Ok(Tube { frames, gt_boxes, gt_masks, spec })
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn n_instances(&self) -> usize {
        self.gt_boxes[0].len()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> &Frame {
        &self.frames[t]
    }

    pub fn gt_boxes(&self) -> &[Vec<BoundingBox>] {
        &self.gt_boxes
    }

    /// Box of instance `i` at frame `t`.
    pub fn gt_box(&self, t: usize, i: usize) -> BoundingBox {
        self.gt_boxes[t][i]
    }

    pub fn gt_masks(&self) -> Option<&Array4<bool>> {
        self.gt_masks.as_ref()
    }

    /// Generator spec this tube was built from, if any.
    pub fn spec(&self) -> Option<&SyntheticSpec> {
        self.spec.as_ref()
    }

    /// Per-pixel instance labels for frame `t`: 0 is background, `i + 1` is
    /// instance `i`. Requires ground-truth masks.
    pub fn instance_labels(&self, t: usize) -> Result<Array2<u8>> {
        let masks = self
            .gt_masks
            .as_ref()
            .ok_or(Error::MissingLabels { frame: t })?;
        if t >= self.n_frames() {
            return Err(Error::MissingLabels { frame: t });
        }
        let (h, w) = (self.height(), self.width());
        let mut labels = Array2::zeros((h, w));
        for i in 0..self.n_instances() {
            for y in 0..h {
                for x in 0..w {
                    if masks[[i, t, y, x]] {
                        if labels[[y, x]] != 0 {
                            return Err(Error::OverlappingMasks { frame: t });
                        }
                        labels[[y, x]] = (i + 1) as u8;
                    }
                }
            }
        }
        Ok(labels)
    }
}

/// Soft per-instance mask probabilities over a whole tube,
/// shape `(n_instances, T, H, W)`, every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskField {
    values: Array4<f64>,
}

impl MaskField {
    pub fn new(values: Array4<f64>) -> Result<MaskField> {
        let (n, t, h, w) = values.dim();
        if n == 0 || t == 0 || h == 0 || w == 0 {
            return Err(Error::dim(format!(
                "mask field dims must be positive, got ({n}, {t}, {h}, {w})"
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::InvalidValue {
                path: "<memory>".to_string(),
                reason: format!("probability {bad} outside [0, 1]"),
            });
        }
        Ok(MaskField { values })
    }

    /// All-`value` field of the given shape.
    pub fn constant(n: usize, t: usize, h: usize, w: usize, value: f64) -> Result<MaskField> {
        MaskField::new(Array4::from_elem((n, t, h, w), value))
    }

    pub fn n_instances(&self) -> usize {
        self.values.dim().0
    }

    pub fn n_frames(&self) -> usize {
        self.values.dim().1
    }

    pub fn height(&self) -> usize {
        self.values.dim().2
    }

    pub fn width(&self) -> usize {
        self.values.dim().3
    }

    pub fn values(&self) -> &Array4<f64> {
        &self.values
    }

    /// Mutable access for perturbation helpers; callers must keep entries
    /// inside `[0, 1]`.
    pub fn values_mut(&mut self) -> &mut Array4<f64> {
        &mut self.values
    }

    /// Errors unless `(T, H, W)` and the instance count match the tube.
    pub fn check_against(&self, tube: &Tube) -> Result<()> {
        let (n, t, h, w) = self.values.dim();
        if t != tube.n_frames() || h != tube.height() || w != tube.width() {
            return Err(Error::dim(format!(
                "mask field ({t}, {h}, {w}) vs tube ({}, {}, {})",
                tube.n_frames(),
                tube.height(),
                tube.width()
            )));
        }
        if n != tube.n_instances() {
            return Err(Error::dim(format!(
                "mask field has {n} instances, tube has {}",
                tube.n_instances()
            )));
        }
        Ok(())
    }
}
