//! OBF1: lossless float-matrix container.
//!
//! Layout: magic "OBF1", then height, width and the unbounded flag as 4-byte
//! little-endian unsigned, then height*width f64 values (little-endian,
//! row-major).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::ImageMatrix;

pub const MAGIC: &[u8; 4] = b"OBF1";
pub const HEADER_LEN: usize = 16;

pub fn encode_obf1(image: &ImageMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + image.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(image.height as u32).to_le_bytes());
    out.extend_from_slice(&(image.width as u32).to_le_bytes());
    out.extend_from_slice(&(image.unbounded as u32).to_le_bytes());
    for v in &image.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_obf1(bytes: &[u8]) -> Result<ImageMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format("file shorter than 16-byte header", 0));
    }
    if &bytes[0..4] != MAGIC {
        let got = String::from_utf8_lossy(&bytes[0..4]).into_owned();
        return Err(Error::format(format!("bad magic {got:?}"), 0));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let height = u32_at(4) as usize;
    let width = u32_at(8) as usize;
    let unbounded = match u32_at(12) {
        0 => false,
        1 => true,
        other => {
            return Err(Error::format(
                format!("unbounded flag must be 0 or 1, got {other}"),
                12,
            ))
        }
    };
    let expected = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::format("dimension overflow", 4))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::format(
            format!(
                "payload length {} does not match {height}x{width} ({expected} bytes)",
                payload.len()
            ),
            HEADER_LEN as u64,
        ));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut img = ImageMatrix::from_vec(height, width, values)?;
    img.unbounded = unbounded;
    Ok(img)
}

pub fn write_obf1(image: &ImageMatrix, path: &Path) -> Result<()> {
    crate::fsutil::write_atomic(path, &encode_obf1(image))
}

pub fn read_obf1(path: &Path) -> Result<ImageMatrix> {
    decode_obf1(&fs::read(path)?)
}
