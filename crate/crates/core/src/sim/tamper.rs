use super::dct::{fdct8x8, idct8x8, quantize};
use super::RawImage;
use crate::error::{Error, Result};
use crate::geom::{BinaryMask, Rect};
use crate::jpeg::{encode_jpeg, quality_to_table, CoeffImage, Component, DctBlock, AC_MIN, COEFF_MAX, COEFF_MIN};

/// JPEG-compresses `img` at quality `qf`.
///
/// Returns the quantized coefficients and the decompressed pixels
/// (dequantized, inverse transformed, rounded and clamped).
pub fn compress_once(img: &RawImage, qf: u8) -> Result<(CoeffImage, RawImage)> {
    if !img.width().is_multiple_of(8) || !img.height().is_multiple_of(8) {
        return Err(Error::invalid(format!(
            "{}x{} image is not a whole number of 8x8 blocks",
            img.width(),
            img.height()
        )));
    }
    let table = quality_to_table(qf, Component::Luminance)?;
    let steps = *table.steps();
    let (bw, bh) = (img.width() / 8, img.height() / 8);
    let mut blocks = Vec::with_capacity(bw * bh);
    let mut decoded = img.clone();
    for by in 0..bh {
        for bx in 0..bw {
            let coeffs = fdct8x8::<f64>(&img.block(bx, by));
            let mut block = DctBlock::default();
            let mut deq = [0f64; 64];
            for n in 0..64 {
                let lo = if n == 0 { COEFF_MIN } else { AC_MIN };
                let q = quantize(coeffs[n], steps[n]).clamp(lo, COEFF_MAX);
                block.coeffs[n] = q as i16;
                deq[n] = f64::from(q * i32::from(steps[n]));
            }
            decoded.put_block(bx, by, &idct8x8(&deq));
            blocks.push(block);
        }
    }
    let c = CoeffImage::new(img.width() as u32, img.height() as u32, blocks, table)?;
    Ok((c, decoded))
}

fn round_div(num: i64, den: i64) -> i64 {
    // half away from zero, den > 0
    let q = (2 * num.abs() + den) / (2 * den);
    if num < 0 {
        -q
    } else {
        q
    }
}

/// Quantizes `x` with step `q1`, dequantizes, then quantizes with step `q2`.
pub fn double_quantize_scalar(x: i64, q1: u32, q2: u32) -> Result<i64> {
    if q1 == 0 || q2 == 0 {
        return Err(Error::invalid("quantization steps must be >= 1"));
    }
    let once = round_div(x, i64::from(q1)) * i64::from(q1);
    Ok(round_div(once, i64::from(q2)))
}

/// Parameters of one simulated splice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TamperSpec {
    pub qf1: u8,
    pub qf2: u8,
    /// The pasted, singly compressed area.
    pub region: Rect,
    /// Shift applied to the pasted content, each component in `0..8`.
    pub grid_offset: (usize, usize),
}

impl TamperSpec {
    pub fn aligned(qf1: u8, qf2: u8, region: Rect) -> Self {
        Self {
            qf1,
            qf2,
            region,
            grid_offset: (0, 0),
        }
    }

    /// Left half of a `width`-wide image, snapped down to the block grid.
    pub fn left_half(qf1: u8, qf2: u8, width: usize, height: usize) -> Self {
        Self::aligned(qf1, qf2, Rect::new(0, 0, width / 2 / 8 * 8, height))
    }

    fn validate(&self, width: usize, height: usize) -> Result<()> {
        if !self.region.fits_in(width, height) {
            return Err(Error::invalid(format!(
                "tamper region {:?} outside {width}x{height} image",
                self.region
            )));
        }
        if self.grid_offset.0 > 7 || self.grid_offset.1 > 7 {
            return Err(Error::invalid("grid offset components must be in 0..8"));
        }
        if self.grid_offset == (0, 0) && !self.region.is_empty() && !self.region.is_block_aligned() {
            return Err(Error::invalid(format!(
                "aligned tamper region {:?} must sit on the 8x8 grid",
                self.region
            )));
        }
        Ok(())
    }
}

/// Builds the tampered image: compress at `qf1`, decompress, paste the original
/// pixels of the region back, and save at `qf2`.
///
/// Returns the JPEG bytes and the mask of the singly compressed (pasted) area.
pub fn tamper_and_recompress(img: &RawImage, spec: &TamperSpec) -> Result<(Vec<u8>, BinaryMask)> {
    let (coeffs, mask) = tamper_coefficients(img, spec)?;
    Ok((encode_jpeg(&coeffs)?, mask))
}

/// Same as [`tamper_and_recompress`] but stops before entropy coding.
pub fn tamper_coefficients(img: &RawImage, spec: &TamperSpec) -> Result<(CoeffImage, BinaryMask)> {
    spec.validate(img.width(), img.height())?;
    let (_, mut composed) = compress_once(img, spec.qf1)?;
    let (dx, dy) = spec.grid_offset;
    let r = spec.region;
    for y in r.y..r.bottom() {
        let sy = (y + dy).min(img.height() - 1);
        for x in r.x..r.right() {
            let sx = (x + dx).min(img.width() - 1);
            composed.set(x, y, img.get(sx, sy));
        }
    }
    let (coeffs, _) = compress_once(&composed, spec.qf2)?;
    Ok((coeffs, BinaryMask::from_rect(img.width(), img.height(), &r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jpeg::parse_jpeg;
    use crate::sim::corpus::synthesize_image;

    #[test]
    fn scalar_double_quantization() {
        assert_eq!(double_quantize_scalar(7, 3, 2).unwrap(), 3);
        for x in -50..=50 {
            for q2 in 1..7 {
                assert_eq!(double_quantize_scalar(x, 1, q2).unwrap(), round_div(x, i64::from(q2)));
            }
        }
        assert!(double_quantize_scalar(1, 0, 1).is_err());
    }

    #[test]
    fn quantize_seven_by_three() {
        assert_eq!(quantize(7.0, 3), 2);
    }

    #[test]
    fn lossless_on_flat_image_at_q100() {
        let img = RawImage::filled(32, 16, 77).unwrap();
        let (_, out) = compress_once(&img, 100).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn requires_block_multiple() {
        let img = RawImage::filled(12, 16, 0).unwrap();
        assert!(compress_once(&img, 90).is_err());
    }

    #[test]
    fn natural_texture_histogram_peaks_at_zero() {
        let img = synthesize_image(3, 256, 256);
        let (c, _) = compress_once(&img, 70).unwrap();
        let mut hist = std::collections::BTreeMap::<i16, usize>::new();
        for b in c.blocks() {
            *hist.entry(b.at(0, 1)).or_default() += 1;
        }
        let mode = hist.iter().max_by_key(|(_, &n)| n).map(|(&v, _)| v).unwrap();
        assert_eq!(mode, 0);
    }

    #[test]
    fn degenerate_regions() {
        let img = synthesize_image(1, 64, 64);
        let (_, all) = tamper_coefficients(&img, &TamperSpec::aligned(50, 90, Rect::square(0, 0, 64))).unwrap();
        assert_eq!(all.count(), 64 * 64);
        let (c, none) = tamper_coefficients(&img, &TamperSpec::aligned(50, 90, Rect::default())).unwrap();
        assert_eq!(none.count(), 0);
        let (_, plain) = compress_once(&img, 50).unwrap();
        let (double, _) = compress_once(&plain, 90).unwrap();
        assert_eq!(c, double);
    }

    #[test]
    fn whole_region_is_single_compression() {
        let img = synthesize_image(2, 64, 64);
        let (c, _) = tamper_coefficients(&img, &TamperSpec::aligned(50, 90, Rect::square(0, 0, 64))).unwrap();
        assert_eq!(c, compress_once(&img, 90).unwrap().0);
    }

    #[test]
    fn bytes_decode_to_the_coefficients() {
        let img = synthesize_image(4, 64, 48);
        let spec = TamperSpec::left_half(60, 80, 64, 48);
        let (bytes, mask) = tamper_and_recompress(&img, &spec).unwrap();
        let (c, m2) = tamper_coefficients(&img, &spec).unwrap();
        assert_eq!(parse_jpeg(&bytes).unwrap(), c);
        assert_eq!(mask, m2);
        assert_eq!(mask.count(), 32 * 48);
    }

    #[test]
    fn rejects_bad_specs() {
        let img = synthesize_image(5, 64, 64);
        assert!(tamper_coefficients(&img, &TamperSpec::aligned(50, 90, Rect::square(32, 32, 40))).is_err());
        assert!(tamper_coefficients(&img, &TamperSpec::aligned(50, 90, Rect::square(3, 0, 8))).is_err());
        let shifted = TamperSpec {
            grid_offset: (3, 5),
            ..TamperSpec::aligned(50, 90, Rect::new(3, 3, 20, 20))
        };
        assert!(tamper_coefficients(&img, &shifted).is_ok());
    }

    #[test]
    fn recompression_at_same_quality_is_idempotent() {
        // Mid-range content keeps the decoded pixels away from the clamp limits.
        let img = synthesize_image(6, 64, 64);
        let mut mid = img.clone();
        for p in mid.pixels_mut() {
            *p = 64 + *p / 2;
        }
        let (c1, d1) = compress_once(&mid, 75).unwrap();
        let (c2, d2) = compress_once(&d1, 75).unwrap();
        let (c3, _) = compress_once(&d2, 75).unwrap();
        // One pass may still move a handful of coefficients; the chain settles.
        let changed = |a: &CoeffImage, b: &CoeffImage| {
            a.blocks()
                .iter()
                .zip(b.blocks())
                .map(|(x, y)| x.coeffs.iter().zip(y.coeffs.iter()).filter(|(p, q)| p != q).count())
                .sum::<usize>()
        };
        let total = c1.blocks().len() * 64;
        assert!(changed(&c1, &c2) * 100 < total, "{} of {total}", changed(&c1, &c2));
        assert!(changed(&c2, &c3) <= changed(&c1, &c2));
    }
}
