//! Box-supervised video segmentation losses with temporal patch
//! correspondence.
//!
//! The crate turns per-frame bounding boxes into a training signal for
//! per-pixel video instance masks, without ever seeing a ground-truth mask:
//!
//! * [`video`] holds the tube data model (frames, boxes, soft mask fields),
//!   sRGB-to-Lab conversion, a deterministic synthetic clip generator, and
//!   the on-disk formats.
//! * [`correspondence`] finds temporal patch matches between frames: for
//!   every pixel, the K nearest patches inside a dilated search window of a
//!   connected frame, kept only below a distance threshold.
//! * [`losses`] scores a mask field: box-projection and color-pairwise
//!   spatial terms plus a temporal consistency term over the patch matches,
//!   all with analytic gradients.
//! * [`matching_cost`] compares predicted mask sequences against
//!   ground-truth box sequences (sampled dice over box masks) and solves
//!   the resulting assignment problem.
//! * [`trainer`] runs plain gradient descent on per-pixel logits to recover
//!   masks from boxes alone, which is the end-to-end check that the losses
//!   do what they claim.

pub mod correspondence;
pub mod error;
pub mod losses;
pub mod matching_cost;
pub mod trainer;
pub mod video;

pub use error::{Error, Result};
