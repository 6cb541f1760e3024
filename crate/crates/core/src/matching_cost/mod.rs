//! Sequence-level matching between predicted masks and ground-truth boxes.
//!
//! Predictions are reduced to per-frame box masks (the tight box of the
//! binarized mask, or empty), so predictions and box ground truth live in
//! the same representation. A spatio-temporal cost compares two such
//! sequences with a single dice score over sampled points from all frames;
//! a per-frame baseline cost (normalized L1 + generalized IoU) is also
//! provided. Costs feed a Hungarian solver for the final assignment.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::video::BoundingBox;

pub mod cost;
pub mod hungarian;

pub use cost::{
    cost_matrix_framewise, cost_matrix_st, framewise_cost, mask_to_boxmask, sample_points,
    st_boxmask_cost, st_boxmask_cost_exhaustive, SamplePolicy,
};
pub use hungarian::hungarian_assign;

/// Per-frame box masks of one instance track: each frame is either a
/// filled axis-aligned rectangle or empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxMaskSequence {
    height: usize,
    width: usize,
    frames: Vec<Option<BoundingBox>>,
}

impl BoxMaskSequence {
    pub fn new(height: usize, width: usize, frames: Vec<Option<BoundingBox>>) -> Result<Self> {
        if height == 0 || width == 0 || frames.is_empty() {
            return Err(Error::dim("box mask sequence needs positive dims".to_string()));
        }
        for (t, b) in frames.iter().enumerate() {
            if let Some(b) = b {
                if b.x_min >= b.x_max
                    || b.y_min >= b.y_max
                    || b.x_max > width as u32
                    || b.y_max > height as u32
                {
                    return Err(Error::dim(format!(
                        "frame {t} box {b:?} invalid for {width}x{height}"
                    )));
                }
            }
        }
        Ok(BoxMaskSequence { height, width, frames })
    }

    /// Ground-truth track of instance `i` in a tube.
    pub fn from_gt_boxes(tube: &crate::video::Tube, i: usize) -> Result<Self> {
        if i >= tube.n_instances() {
            return Err(Error::dim(format!(
                "instance {i} out of range, tube has {}",
                tube.n_instances()
            )));
        }
        let frames = (0..tube.n_frames()).map(|t| Some(tube.gt_box(t, i))).collect();
        BoxMaskSequence::new(tube.height(), tube.width(), frames)
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn frames(&self) -> &[Option<BoundingBox>] {
        &self.frames
    }

    /// Box mask value at `(x, y)` of frame `t`: 1.0 inside, 0.0 outside.
    pub fn value_at(&self, t: usize, x: u32, y: u32) -> f64 {
        match &self.frames[t] {
            Some(b) if b.contains(x, y) => 1.0,
            _ => 0.0,
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.height != other.height
            || self.width != other.width
            || self.frames.len() != other.frames.len()
        {
            return Err(Error::dim(format!(
                "box mask sequences disagree: {}x{}x{} vs {}x{}x{}",
                self.frames.len(),
                self.height,
                self.width,
                other.frames.len(),
                other.height,
                other.width
            )));
        }
        Ok(())
    }
}

/// Dense pairwise costs, predictions as rows and ground truth as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    costs: Array2<f64>,
}

impl CostMatrix {
    pub fn new(costs: Array2<f64>) -> Result<Self> {
        if let Some(bad) = costs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidValue {
                path: "<memory>".to_string(),
                reason: format!("non-finite cost {bad}"),
            });
        }
        Ok(CostMatrix { costs })
    }

    pub fn n_rows(&self) -> usize {
        self.costs.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.costs.ncols()
    }

    pub fn costs(&self) -> &Array2<f64> {
        &self.costs
    }
}

/// One-to-one assignment of rows to columns minimizing total cost. Rows
/// beyond the smaller dimension stay unassigned.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `pairs[row] = Some(col)` for assigned rows.
    pub pairs: Vec<Option<usize>>,
    pub total_cost: f64,
}
