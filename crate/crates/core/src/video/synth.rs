//! Deterministic synthetic tube generation.
//!
//! Scenes are a handful of colored shapes translating over a flat
//! background, optionally hidden behind a static occluder box. Instances
//! are painted in declaration order, so a later instance covers an earlier
//! one wherever they overlap; ground truth records the *visible* part of
//! each instance. All randomness (currently only the Lab-space pixel noise)
//! comes from a ChaCha stream seeded by the spec, so a spec reproduces its
//! tube bit for bit.

use ndarray::{Array2, Array3, Array4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video::{color, BoundingBox, Frame, Tube};

/// Fallback instance colors, cycled by instance index.
const PALETTE: [[u8; 3]; 8] = [
    [200, 40, 40],
    [40, 80, 200],
    [40, 170, 70],
    [230, 170, 40],
    [150, 60, 190],
    [60, 190, 190],
    [240, 120, 50],
    [120, 200, 60],
];

const OCCLUDER_RGB: [u8; 3] = [45, 45, 45];

fn default_frames() -> u32 {
    5
}

fn default_background() -> [u8; 3] {
    [210, 210, 210]
}

/// Shape geometry at frame 0, in pixel units. A pixel belongs to a shape
/// when its center `(x + 0.5, y + 0.5)` falls inside the shape extent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Rectangle(RectShape),
    Disk(DiskShape),
    Polygon(PolygonShape),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectShape {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskShape {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonShape {
    pub vertices: Vec<(f64, f64)>,
}

impl ShapeKind {
    fn validate(&self) -> Result<()> {
        match self {
            ShapeKind::Rectangle(r) if r.w <= 0.0 || r.h <= 0.0 => Err(
                Error::invalid_config(format!("rectangle must have positive extent: {r:?}")),
            ),
            ShapeKind::Disk(d) if d.radius <= 0.0 => Err(Error::invalid_config(format!(
                "disk must have positive radius: {d:?}"
            ))),
            ShapeKind::Polygon(p) if p.vertices.len() < 3 => Err(Error::invalid_config(
                "polygon needs at least 3 vertices".to_string(),
            )),
            _ => Ok(()),
        }
    }

    /// Point-inside test after translating the shape by `(dx, dy)`.
    fn contains(&self, px: f64, py: f64, dx: f64, dy: f64) -> bool {
        match self {
            ShapeKind::Rectangle(r) => {
                let (x0, y0) = (r.x + dx, r.y + dy);
                px >= x0 && px < x0 + r.w && py >= y0 && py < y0 + r.h
            }
            ShapeKind::Disk(d) => {
                let (ex, ey) = (px - d.cx - dx, py - d.cy - dy);
                ex * ex + ey * ey <= d.radius * d.radius
            }
            ShapeKind::Polygon(p) => {
                // Even-odd rule over the translated vertex ring.
                let mut inside = false;
                let n = p.vertices.len();
                for i in 0..n {
                    let (x1, y1) = (p.vertices[i].0 + dx, p.vertices[i].1 + dy);
                    let j = (i + 1) % n;
                    let (x2, y2) = (p.vertices[j].0 + dx, p.vertices[j].1 + dy);
                    if (y1 > py) != (y2 > py) {
                        let cross_x = x1 + (py - y1) / (y2 - y1) * (x2 - x1);
                        if px < cross_x {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }
}

/// One moving instance: a shape, a constant velocity, an optional color.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub shape: ShapeKind,
    /// Translation per frame, `(vx, vy)` in pixels.
    #[serde(default)]
    pub velocity: (f64, f64),
    /// Fill color; defaults to a palette entry chosen by instance index.
    #[serde(default)]
    pub color: Option<[u8; 3]>,
}

/// Full description of a synthetic tube; the seed is part of the spec, so
/// equal specs yield bit-identical tubes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub width: u32,
    pub height: u32,
    #[serde(default = "default_frames")]
    pub frames: u32,
    pub instances: Vec<InstanceSpec>,
    /// Std-dev of per-channel Gaussian noise in normalized Lab units.
    #[serde(default)]
    pub noise_sigma: f64,
    /// Static box painted over everything, hiding whatever it covers.
    #[serde(default)]
    pub occluder: Option<BoundingBox>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_background")]
    pub background: [u8; 3],
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid_config("frame dimensions must be positive"));
        }
        if self.frames == 0 {
            return Err(Error::invalid_config("tube needs at least one frame"));
        }
        if self.instances.len() > 254 {
            return Err(Error::invalid_config("at most 254 instances supported"));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::invalid_config(format!(
                "noise_sigma must be finite and non-negative, got {}",
                self.noise_sigma
            )));
        }
        for inst in &self.instances {
            inst.shape.validate()?;
            if !inst.velocity.0.is_finite() || !inst.velocity.1.is_finite() {
                return Err(Error::invalid_config("velocity must be finite"));
            }
        }
        if let Some(occ) = &self.occluder {
            if occ.x_min >= occ.x_max
                || occ.y_min >= occ.y_max
                || occ.x_max > self.width
                || occ.y_max > self.height
            {
                return Err(Error::invalid_config(format!(
                    "occluder {occ:?} is degenerate or out of frame"
                )));
            }
        }
        Ok(())
    }

    fn instance_color(&self, i: usize) -> [u8; 3] {
        self.instances[i]
            .color
            .unwrap_or(PALETTE[i % PALETTE.len()])
    }
}

/// Tight half-open hull of the true pixels; `None` when the mask is empty.
fn tight_box(mask: &Array2<bool>) -> Option<BoundingBox> {
    let (h, w) = mask.dim();
    let (mut x0, mut y0, mut x1, mut y1) = (w, h, 0, 0);
    let mut any = false;
    for y in 0..h {
        for x in 0..w {
            if mask[[y, x]] {
                any = true;
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    any.then(|| BoundingBox::new(x0 as u32, y0 as u32, x1 as u32 + 1, y1 as u32 + 1))
}

/// Renders the spec into a tube with visible ground-truth masks and tight
/// boxes. Fails if any instance ends up with no visible pixel in some frame
/// (it left the frame, or the occluder or a later instance covers it).
pub fn generate_synthetic_tube(spec: &SyntheticSpec) -> Result<Tube> {
    spec.validate()?;
    let (w, h, t_len) = (spec.width as usize, spec.height as usize, spec.frames as usize);
    let n = spec.instances.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).expect("validated sigma"))
    } else {
        None
    };

    let mut frames = Vec::with_capacity(t_len);
    let mut gt_boxes = Vec::with_capacity(t_len);
    let mut gt_masks = Array4::from_elem((n, t_len, h, w), false);

    for t in 0..t_len {
        // Full (unoccluded) footprint of each instance at this frame.
        let mut full: Vec<Array2<bool>> = Vec::with_capacity(n);
        for inst in &spec.instances {
            let dx = inst.velocity.0 * t as f64;
            let dy = inst.velocity.1 * t as f64;
            let mut m = Array2::from_elem((h, w), false);
            for y in 0..h {
                for x in 0..w {
                    m[[y, x]] = inst
                        .shape
                        .contains(x as f64 + 0.5, y as f64 + 0.5, dx, dy);
                }
            }
            full.push(m);
        }

        // Visibility: what survives later instances and the occluder.
        let mut boxes_t = Vec::with_capacity(n);
        for i in 0..n {
            let mut visible = full[i].clone();
            for above in full.iter().skip(i + 1) {
                for (v, &a) in visible.iter_mut().zip(above.iter()) {
                    *v = *v && !a;
                }
            }
            if let Some(occ) = &spec.occluder {
                for y in 0..h {
                    for x in 0..w {
                        if occ.contains(x as u32, y as u32) {
                            visible[[y, x]] = false;
                        }
                    }
                }
            }
            let b = tight_box(&visible).ok_or(Error::EmptyInstance { instance: i, frame: t })?;
            boxes_t.push(b);
            for y in 0..h {
                for x in 0..w {
                    gt_masks[[i, t, y, x]] = visible[[y, x]];
                }
            }
        }
        gt_boxes.push(boxes_t);

        // Paint the scene back to front, occluder last.
        let mut rgb = Array3::zeros((h, w, 3));
        for y in 0..h {
            for x in 0..w {
                let mut px = spec.background;
                for (i, covered) in full.iter().enumerate() {
                    if covered[[y, x]] {
                        px = spec.instance_color(i);
                    }
                }
                if let Some(occ) = &spec.occluder {
                    if occ.contains(x as u32, y as u32) {
                        px = OCCLUDER_RGB;
                    }
                }
                for c in 0..3 {
                    rgb[[y, x, c]] = px[c];
                }
            }
        }

        // Noise lives in Lab space; realize it back into storable sRGB so a
        // saved tube reloads to exactly the in-memory pixels.
        if let Some(dist) = &noise {
            for y in 0..h {
                for x in 0..w {
                    let mut lab =
                        color::rgb_to_lab([rgb[[y, x, 0]], rgb[[y, x, 1]], rgb[[y, x, 2]]]);
                    for ch in &mut lab {
                        *ch += dist.sample(&mut rng);
                    }
                    let quantized = color::lab_to_rgb(lab);
                    for c in 0..3 {
                        rgb[[y, x, c]] = quantized[c];
                    }
                }
            }
        }
        frames.push(Frame::from_rgb(rgb)?);
    }

    Tube::with_spec(frames, gt_boxes, Some(gt_masks), Some(spec.clone()))
}
