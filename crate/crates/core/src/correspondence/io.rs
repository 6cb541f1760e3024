//! Binary container for match sets.
//!
//! Layout, all little-endian: 16-byte magic (`MFVISMCH` zero-padded), then
//! `u32` source frame, target frame, H, W, K, then for each source pixel in
//! row-major order a `u8` match count followed by that many
//! `(u16 x, u16 y, f32 distance)` records.

use std::fs;
use std::path::Path;

use crate::correspondence::{Match, MatchSet};
use crate::error::{Error, Result};

pub const MATCH_MAGIC: &[u8; 8] = b"MFVISMCH";
const MAGIC_LEN: usize = 16;
const HEADER_LEN: usize = MAGIC_LEN + 20;

pub fn save_matchset(path: &Path, ms: &MatchSet) -> Result<()> {
    if ms.width > u16::MAX as usize || ms.height > u16::MAX as usize {
        return Err(Error::invalid_config(format!(
            "frame {}x{} too large for u16 match coordinates",
            ms.width, ms.height
        )));
    }
    let mut out = Vec::with_capacity(ms.storage_bytes());
    let mut magic = [0u8; MAGIC_LEN];
    magic[..8].copy_from_slice(MATCH_MAGIC);
    out.extend_from_slice(&magic);
    for v in [ms.source as u32, ms.target as u32, ms.height as u32, ms.width as u32, ms.k] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for list in ms.lists() {
        debug_assert!(list.len() <= u8::MAX as usize);
        out.push(list.len() as u8);
        for m in list {
            out.extend_from_slice(&(m.x as u16).to_le_bytes());
            out.extend_from_slice(&(m.y as u16).to_le_bytes());
            out.extend_from_slice(&(m.distance as f32).to_le_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_matchset(path: &Path) -> Result<MatchSet> {
    let bytes = fs::read(path)?;
    let display = path.display().to_string();
    if bytes.len() < HEADER_LEN {
        return Err(Error::MalformedHeader {
            path: display,
            reason: format!("file is {} bytes, header needs {HEADER_LEN}", bytes.len()),
        });
    }
    if &bytes[..8] != MATCH_MAGIC || bytes[8..MAGIC_LEN].iter().any(|&b| b != 0) {
        return Err(Error::MalformedHeader { path: display, reason: "bad magic".to_string() });
    }
    let word = |i: usize| {
        u32::from_le_bytes(bytes[MAGIC_LEN + 4 * i..MAGIC_LEN + 4 * i + 4].try_into().unwrap())
    };
    let (source, target) = (word(0) as usize, word(1) as usize);
    let (h, w, k) = (word(2) as usize, word(3) as usize, word(4));
    if h == 0 || w == 0 || k == 0 || k > 255 {
        return Err(Error::MalformedHeader {
            path: display,
            reason: format!("implausible header: H={h} W={w} K={k}"),
        });
    }

    let mut lists = Vec::with_capacity(h * w);
    let mut off = HEADER_LEN;
    for pixel in 0..h * w {
        if off >= bytes.len() {
            return Err(Error::TruncatedPayload {
                path: display,
                expected: off + 1,
                got: bytes.len(),
            });
        }
        let count = bytes[off] as usize;
        off += 1;
        if count > k as usize {
            return Err(Error::InvalidValue {
                path: display,
                reason: format!("pixel {pixel} lists {count} matches, K is {k}"),
            });
        }
        let need = off + count * 8;
        if need > bytes.len() {
            return Err(Error::TruncatedPayload { path: display, expected: need, got: bytes.len() });
        }
        let mut list = Vec::with_capacity(count);
        for _ in 0..count {
            let x = u16::from_le_bytes(bytes[off..off + 2].try_into().unwrap()) as u32;
            let y = u16::from_le_bytes(bytes[off + 2..off + 4].try_into().unwrap()) as u32;
            let d = f32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap()) as f64;
            off += 8;
            if x as usize >= w || y as usize >= h || !d.is_finite() {
                return Err(Error::InvalidValue {
                    path: display.clone(),
                    reason: format!("match ({x}, {y}, {d}) out of range for {w}x{h}"),
                });
            }
            list.push(Match { x, y, distance: d });
        }
        lists.push(list);
    }
    if off != bytes.len() {
        return Err(Error::TruncatedPayload { path: display, expected: off, got: bytes.len() });
    }
    Ok(MatchSet::new(source, target, h, w, k, lists))
}
