//! Binary PGM ("P5") reader/writer, 8-bit, maxval 255, comment-free header.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::ImageMatrix;

/// Loads a binary PGM file; pixel values are scaled to [0, 1] as byte / 255.
pub fn load_pgm(path: &Path) -> Result<ImageMatrix> {
    let bytes = fs::read(path)?;
    parse_pgm(&bytes)
}

pub fn parse_pgm(bytes: &[u8]) -> Result<ImageMatrix> {
    let mut pos = 0usize;
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        let got = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(Error::format(
            format!("expected magic \"P5\", got {got:?}"),
            0,
        ));
    }
    pos += 2;
    let width = read_ascii_uint(bytes, &mut pos)?;
    let height = read_ascii_uint(bytes, &mut pos)?;
    let maxval = read_ascii_uint(bytes, &mut pos)?;
    if maxval != 255 {
        return Err(Error::format(
            format!("unsupported maxval {maxval}, only 255"),
            pos as u64,
        ));
    }
    // exactly one whitespace byte separates the header from the payload
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(Error::format(
                "missing whitespace before pixel payload",
                pos as u64,
            ))
        }
    }
    if height == 0 || width == 0 {
        return Err(Error::format("zero image dimension", 2));
    }
    let expected = height * width;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::format(
            format!(
                "truncated payload: expected {expected} bytes, found {}",
                payload.len()
            ),
            (pos + payload.len()) as u64,
        ));
    }
    if payload.len() > expected {
        return Err(Error::format(
            format!("trailing bytes after {expected}-byte payload"),
            (pos + expected) as u64,
        ));
    }
    let values = payload.iter().map(|&b| b as f64 / 255.0).collect();
    ImageMatrix::from_vec(height, width, values)
}

/// Saves an image as binary PGM.
///
/// Images already within [0, 1] are written as round_ties_even(v * 255), so
/// an 8-bit load/save round trip is byte-identical. Out-of-range (unbounded)
/// matrices are min-max rescaled to [0, 255] first. Constant images write all
/// zeros.
pub fn save_pgm(image: &ImageMatrix, path: &Path) -> Result<()> {
    let bytes = encode_pgm(image);
    crate::fsutil::write_atomic(path, &bytes)
}

pub fn encode_pgm(image: &ImageMatrix) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width, image.height);
    let mut out = header.into_bytes();
    out.extend(quantize(image));
    out
}

fn quantize(image: &ImageMatrix) -> Vec<u8> {
    let min = image.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = image
        .values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let in_range = min >= 0.0 && max <= 1.0;
    if max == min && !in_range {
        return vec![0u8; image.values.len()];
    }
    image
        .values
        .iter()
        .map(|&v| {
            let scaled = if in_range {
                v * 255.0
            } else {
                (v - min) / (max - min) * 255.0
            };
            scaled.round_ties_even().clamp(0.0, 255.0) as u8
        })
        .collect()
}

fn read_ascii_uint(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return Err(Error::format("expected decimal integer", start as u64));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format("invalid integer", start as u64))
}
