//! The float image carrier plus per-image normalization and resizing.

use crate::error::{Error, Result};

/// H×W grid of 64-bit floats, row-major.
///
/// Normalized images hold values in [0, 1]. Matrices produced by SVD
/// obfuscation can leave that range; those carry `unbounded: true`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageMatrix {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
    pub unbounded: bool,
}

impl ImageMatrix {
    pub fn from_vec(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Domain("image dimensions must be >= 1".into()));
        }
        if values.len() != height * width {
            return Err(Error::Domain(format!(
                "value count {} does not match {height}x{width}",
                values.len()
            )));
        }
        Ok(ImageMatrix {
            height,
            width,
            values,
            unbounded: false,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        ImageMatrix {
            height,
            width,
            values: vec![0.0; height * width],
            unbounded: false,
        }
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut f64 {
        &mut self.values[row * self.width + col]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Bitwise equality of every value (NaN-free inputs assumed).
    pub fn bit_eq(&self, other: &ImageMatrix) -> bool {
        self.height == other.height
            && self.width == other.width
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Per-image min-max scaling into [0, 1]. A constant image maps to all zeros.
pub fn minmax_normalize(image: &ImageMatrix) -> ImageMatrix {
    let min = image.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = image
        .values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let values = if range == 0.0 {
        vec![0.0; image.values.len()]
    } else {
        image.values.iter().map(|v| (v - min) / range).collect()
    };
    ImageMatrix {
        height: image.height,
        width: image.width,
        values,
        unbounded: false,
    }
}

/// Bilinear resize on a corner-aligned sampling grid.
pub fn resize_bilinear(image: &ImageMatrix, out_h: usize, out_w: usize) -> Result<ImageMatrix> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::Domain("output dimensions must be >= 1".into()));
    }
    let (in_h, in_w) = image.dims();
    let scale = |i: usize, n_out: usize, n_in: usize| -> f64 {
        if n_out == 1 {
            0.0
        } else {
            i as f64 * (n_in - 1) as f64 / (n_out - 1) as f64
        }
    };
    let mut values = Vec::with_capacity(out_h * out_w);
    for r in 0..out_h {
        let sr = scale(r, out_h, in_h);
        let r0 = sr.floor() as usize;
        let r1 = (r0 + 1).min(in_h - 1);
        let fr = sr - r0 as f64;
        for c in 0..out_w {
            let sc = scale(c, out_w, in_w);
            let c0 = sc.floor() as usize;
            let c1 = (c0 + 1).min(in_w - 1);
            let fc = sc - c0 as f64;
            // lerp form keeps constant rows/columns exact
            let lerp = |a: f64, b: f64, f: f64| a + f * (b - a);
            let top = lerp(image.at(r0, c0), image.at(r0, c1), fc);
            let bot = lerp(image.at(r1, c0), image.at(r1, c1), fc);
            values.push(lerp(top, bot, fr));
        }
    }
    Ok(ImageMatrix {
        height: out_h,
        width: out_w,
        values,
        unbounded: image.unbounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_basic() {
        let img = ImageMatrix::from_vec(1, 3, vec![2.0, 4.0, 6.0]).unwrap();
        assert_eq!(minmax_normalize(&img).values, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_full_range_is_identity() {
        let img = ImageMatrix::from_vec(1, 4, vec![0.0, 0.25, 0.75, 1.0]).unwrap();
        assert_eq!(minmax_normalize(&img).values, img.values);
    }

    #[test]
    fn normalize_constant_maps_to_zeros() {
        let img = ImageMatrix::from_vec(1, 2, vec![3.0, 3.0]).unwrap();
        assert_eq!(minmax_normalize(&img).values, vec![0.0, 0.0]);
    }

    #[test]
    fn normalize_is_idempotent_on_spanning_images() {
        let img = ImageMatrix::from_vec(2, 2, vec![0.0, 0.3, 0.9, 1.0]).unwrap();
        let once = minmax_normalize(&img);
        let twice = minmax_normalize(&once);
        assert!(once.bit_eq(&twice));
    }

    #[test]
    fn resize_identity_is_bit_exact() {
        let img = ImageMatrix::from_vec(3, 4, (0..12).map(|v| v as f64 / 11.0).collect()).unwrap();
        let out = resize_bilinear(&img, 3, 4).unwrap();
        assert!(out.bit_eq(&img));
    }

    #[test]
    fn resize_1x2_to_1x3() {
        let img = ImageMatrix::from_vec(1, 2, vec![0.0, 1.0]).unwrap();
        let out = resize_bilinear(&img, 1, 3).unwrap();
        assert_eq!(out.values, vec![0.0, 0.5, 1.0]);
    }

    // Independent naive oracle: sample each output pixel directly from the
    // corner-aligned grid definition.
    #[test]
    fn resize_matches_naive_oracle() {
        let img = ImageMatrix::from_vec(2, 2, vec![0.1, 0.9, 0.4, 0.2]).unwrap();
        let out = resize_bilinear(&img, 4, 4).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let sr = r as f64 * 1.0 / 3.0;
                let sc = c as f64 * 1.0 / 3.0;
                let (r0, c0) = (sr.floor() as usize, sc.floor() as usize);
                let (r1, c1) = ((r0 + 1).min(1), (c0 + 1).min(1));
                let (fr, fc) = (sr - r0 as f64, sc - c0 as f64);
                let expect = img.at(r0, c0) * (1.0 - fr) * (1.0 - fc)
                    + img.at(r0, c1) * (1.0 - fr) * fc
                    + img.at(r1, c0) * fr * (1.0 - fc)
                    + img.at(r1, c1) * fr * fc;
                assert!((out.at(r, c) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn resize_preserves_constant_images() {
        let img = ImageMatrix::from_vec(3, 3, vec![0.4; 9]).unwrap();
        let out = resize_bilinear(&img, 7, 5).unwrap();
        assert!(out.values.iter().all(|&v| v == 0.4));
    }
}
