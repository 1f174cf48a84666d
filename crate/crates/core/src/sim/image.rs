use std::path::Path;

use crate::error::{Error, Result};

/// 8-bit grayscale image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RawImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("image {width}x{height} is empty")));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "{} samples for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    /// Top-left crop to multiples of 8 in both dimensions.
    pub fn crop_to_blocks(&self) -> Result<Self> {
        let (w, h) = (self.width / 8 * 8, self.height / 8 * 8);
        if w == 0 || h == 0 {
            return Err(Error::invalid(format!("image {}x{} holds no 8x8 block", self.width, self.height)));
        }
        let mut pixels = Vec::with_capacity(w * h);
        for y in 0..h {
            pixels.extend_from_slice(&self.pixels[y * self.width..y * self.width + w]);
        }
        Ok(Self {
            width: w,
            height: h,
            pixels,
        })
    }

    pub fn block(&self, bx: usize, by: usize) -> [u8; 64] {
        let mut out = [0u8; 64];
        for y in 0..8 {
            let row = (by * 8 + y) * self.width + bx * 8;
            out[y * 8..y * 8 + 8].copy_from_slice(&self.pixels[row..row + 8]);
        }
        out
    }

    pub fn put_block(&mut self, bx: usize, by: usize, samples: &[u8; 64]) {
        for y in 0..8 {
            let row = (by * 8 + y) * self.width + bx * 8;
            self.pixels[row..row + 8].copy_from_slice(&samples[y * 8..y * 8 + 8]);
        }
    }

    /// Binary P5 encoding.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// Parses binary P5 with maxval 255. Comments are allowed in the header.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut fields = Vec::with_capacity(4);
        while fields.len() < 4 {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
                if bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Format("truncated PGM header".into()));
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap_or("").to_string());
        }
        if fields[0] != "P5" {
            return Err(Error::Format(format!("not a binary PGM (magic {:?})", fields[0])));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad PGM header field {s:?}")))
        };
        let (w, h, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
        if maxval != 255 {
            return Err(Error::Format(format!("PGM maxval {maxval} unsupported, need 255")));
        }
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let raster = bytes
            .get(pos..pos + w * h)
            .ok_or_else(|| Error::Format("truncated PGM raster".into()))?;
        Self::new(w, h, raster.to_vec())
    }

    pub fn read_pgm(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_pgm(&bytes)
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip_with_comment() {
        let img = RawImage::new(9, 8, (0..72).map(|v| v as u8).collect()).unwrap();
        assert_eq!(RawImage::from_pgm(&img.to_pgm()).unwrap(), img);
        let mut with_comment = b"P5\n# made by hand\n9 8\n255\n".to_vec();
        with_comment.extend_from_slice(img.pixels());
        assert_eq!(RawImage::from_pgm(&with_comment).unwrap(), img);
    }

    #[test]
    fn rejects_bad_pgm() {
        assert!(RawImage::from_pgm(b"P2\n8 8\n255\n").is_err());
        assert!(RawImage::from_pgm(b"P5\n8 8\n255\n\x00\x01").is_err());
        assert!(RawImage::from_pgm(b"P5\n8 8\n65535\n").is_err());
    }

    #[test]
    fn too_small() {
        assert!(RawImage::filled(0, 8, 0).is_err());
        assert!(RawImage::filled(7, 8, 0).unwrap().crop_to_blocks().is_err());
    }

    #[test]
    fn crop() {
        let img = RawImage::filled(20, 17, 3).unwrap().crop_to_blocks().unwrap();
        assert_eq!((img.width(), img.height()), (16, 16));
    }
}
