//! On-disk formats for tubes and mask fields.
//!
//! A tube is a directory: `frame_%04d.png` (8-bit RGB), an optional
//! `labels_%04d.png` per frame (8-bit gray, 0 = background, i+1 = instance
//! i) when ground-truth masks exist, and a `tube.json` with dimensions,
//! per-frame per-instance boxes, and an echo of the generator spec.
//!
//! A mask field is flat little-endian binary: a 16-byte magic (`MFVISMSK`
//! padded with zeros), four `u32` dims (instances, T, H, W), then `f32`
//! probabilities in instance-major, frame-major, row-major order. The same
//! container, minus the probability range check, stores gradient dumps.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};
use ndarray::{Array3, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video::{BoundingBox, Frame, MaskField, SyntheticSpec, Tube};

pub const MASK_MAGIC: &[u8; 8] = b"MFVISMSK";
const MAGIC_LEN: usize = 16;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TubeDoc {
    frames: u32,
    height: u32,
    width: u32,
    /// `boxes[t][i] = [x_min, y_min, x_max, y_max]`.
    boxes: Vec<Vec<[u32; 4]>>,
    has_masks: bool,
    spec: Option<SyntheticSpec>,
}

fn frame_name(t: usize) -> String {
    format!("frame_{t:04}.png")
}

fn labels_name(t: usize) -> String {
    format!("labels_{t:04}.png")
}

/// Writes the tube directory, creating it if needed. Ground-truth masks are
/// stored as per-frame label maps, which requires them to be disjoint.
pub fn save_tube(dir: &Path, tube: &Tube) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (h, w) = (tube.height() as u32, tube.width() as u32);
    for (t, frame) in tube.frames().iter().enumerate() {
        let raw = frame.rgb().as_slice().expect("standard layout").to_vec();
        let img = RgbImage::from_raw(w, h, raw).expect("sized buffer");
        img.save(dir.join(frame_name(t)))?;
    }
    if tube.gt_masks().is_some() {
        for t in 0..tube.n_frames() {
            let labels = tube.instance_labels(t)?;
            let raw = labels.as_slice().expect("standard layout").to_vec();
            let img = GrayImage::from_raw(w, h, raw).expect("sized buffer");
            img.save(dir.join(labels_name(t)))?;
        }
    }
    let doc = TubeDoc {
        frames: tube.n_frames() as u32,
        height: h,
        width: w,
        boxes: tube
            .gt_boxes()
            .iter()
            .map(|per_frame| {
                per_frame
                    .iter()
                    .map(|b| [b.x_min, b.y_min, b.x_max, b.y_max])
                    .collect()
            })
            .collect(),
        has_masks: tube.gt_masks().is_some(),
        spec: tube.spec().cloned(),
    };
    let file = fs::File::create(dir.join("tube.json"))?;
    serde_json::to_writer_pretty(file, &doc)?;
    Ok(())
}

fn load_png(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::Image(other),
    })
}

pub fn load_tube(dir: &Path) -> Result<Tube> {
    let doc_path = dir.join("tube.json");
    let doc: TubeDoc = serde_json::from_reader(fs::File::open(&doc_path)?).map_err(|e| {
        Error::MalformedHeader { path: doc_path.display().to_string(), reason: e.to_string() }
    })?;
    let t_len = doc.frames as usize;
    if doc.boxes.len() != t_len {
        return Err(Error::dim(format!(
            "tube.json lists {} frames but {} box rows",
            t_len,
            doc.boxes.len()
        )));
    }

    let mut frames = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let path = dir.join(frame_name(t));
        let img = load_png(&path)?;
        let rgb = match img {
            DynamicImage::ImageRgb8(img) => img,
            other => {
                return Err(Error::InvalidValue {
                    path: path.display().to_string(),
                    reason: format!("frame must be 8-bit RGB, got {:?}", other.color()),
                })
            }
        };
        if rgb.width() != doc.width || rgb.height() != doc.height {
            return Err(Error::dim(format!(
                "frame {t} is {}x{}, tube.json says {}x{}",
                rgb.width(),
                rgb.height(),
                doc.width,
                doc.height
            )));
        }
        let arr = Array3::from_shape_vec(
            (doc.height as usize, doc.width as usize, 3),
            rgb.into_raw(),
        )
        .expect("raw buffer matches dims");
        frames.push(Frame::from_rgb(arr)?);
    }

    let gt_boxes: Vec<Vec<BoundingBox>> = doc
        .boxes
        .iter()
        .map(|per_frame| {
            per_frame
                .iter()
                .map(|b| BoundingBox::new(b[0], b[1], b[2], b[3]))
                .collect()
        })
        .collect();

    let gt_masks = if doc.has_masks {
        let n = gt_boxes[0].len();
        let (h, w) = (doc.height as usize, doc.width as usize);
        let mut masks = Array4::from_elem((n, t_len, h, w), false);
        for t in 0..t_len {
            let path = dir.join(labels_name(t));
            let img = load_png(&path)?;
            let gray = match img {
                DynamicImage::ImageLuma8(img) => img,
                other => {
                    return Err(Error::InvalidValue {
                        path: path.display().to_string(),
                        reason: format!("labels must be 8-bit gray, got {:?}", other.color()),
                    })
                }
            };
            for y in 0..h {
                for x in 0..w {
                    let label = gray.get_pixel(x as u32, y as u32).0[0] as usize;
                    if label > n {
                        return Err(Error::InvalidValue {
                            path: path.display().to_string(),
                            reason: format!("label {label} exceeds instance count {n}"),
                        });
                    }
                    if label > 0 {
                        masks[[label - 1, t, y, x]] = true;
                    }
                }
            }
        }
        Some(masks)
    } else {
        None
    };

    Tube::with_spec(frames, gt_boxes, gt_masks, doc.spec)
}

fn write_volume_to(path: &Path, values: &Array4<f64>) -> Result<()> {
    let mut magic = [0u8; MAGIC_LEN];
    magic[..8].copy_from_slice(MASK_MAGIC);
    let (n, t, h, w) = values.dim();
    let mut out = Vec::with_capacity(MAGIC_LEN + 16 + values.len() * 4);
    out.extend_from_slice(&magic);
    for dim in [n, t, h, w] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in values.iter() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

fn read_volume_from(path: &Path) -> Result<Array4<f64>> {
    let bytes = fs::read(path)?;
    let display = path.display().to_string();
    if bytes.len() < MAGIC_LEN + 16 {
        return Err(Error::MalformedHeader {
            path: display,
            reason: format!("file is {} bytes, header needs {}", bytes.len(), MAGIC_LEN + 16),
        });
    }
    if &bytes[..8] != MASK_MAGIC || bytes[8..MAGIC_LEN].iter().any(|&b| b != 0) {
        return Err(Error::MalformedHeader {
            path: display,
            reason: "bad magic".to_string(),
        });
    }
    let mut dims = [0usize; 4];
    for (i, dim) in dims.iter_mut().enumerate() {
        let off = MAGIC_LEN + 4 * i;
        *dim = u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
    }
    let [n, t, h, w] = dims;
    if n == 0 || t == 0 || h == 0 || w == 0 {
        return Err(Error::MalformedHeader {
            path: display,
            reason: format!("zero dimension in header ({n}, {t}, {h}, {w})"),
        });
    }
    let count = n * t * h * w;
    let expected = MAGIC_LEN + 16 + count * 4;
    if bytes.len() != expected {
        return Err(Error::TruncatedPayload { path: display, expected, got: bytes.len() });
    }
    let mut values = Vec::with_capacity(count);
    for i in 0..count {
        let off = MAGIC_LEN + 16 + 4 * i;
        let v = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as f64;
        if !v.is_finite() {
            return Err(Error::InvalidValue {
                path: display.clone(),
                reason: format!("non-finite value at entry {i}"),
            });
        }
        values.push(v);
    }
    Ok(Array4::from_shape_vec((n, t, h, w), values).expect("counted"))
}

pub fn save_maskfield(path: &Path, mask: &MaskField) -> Result<()> {
    write_volume_to(path, mask.values())
}

/// Loads a mask field, validating that every stored value is a probability.
pub fn load_maskfield(path: &Path) -> Result<MaskField> {
    let values = read_volume_from(path)?;
    if let Some(bad) = values.iter().find(|v| **v < 0.0 || **v > 1.0) {
        return Err(Error::InvalidValue {
            path: path.display().to_string(),
            reason: format!("probability {bad} outside [0, 1]"),
        });
    }
    MaskField::new(values)
}

/// Writes an arbitrary `(n, T, H, W)` volume (e.g. a gradient dump) in the
/// mask-field container without the probability range check.
pub fn save_volume(path: &Path, values: &Array4<f64>) -> Result<()> {
    write_volume_to(path, values)
}

pub fn load_volume(path: &Path) -> Result<Array4<f64>> {
    read_volume_from(path)
}
