//! Pixel rectangles and binary masks.

use crate::error::{Error, Result};
use crate::sim::RawImage;

/// Axis-aligned pixel rectangle `[x, x+width) x [y, y+height)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    pub const fn square(x: usize, y: usize, side: usize) -> Self {
        Self::new(x, y, side, side)
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    pub fn right(&self) -> usize {
        self.x + self.width
    }

    pub fn bottom(&self) -> usize {
        self.y + self.height
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.right() <= width && self.bottom() <= height
    }

    pub fn is_block_aligned(&self) -> bool {
        [self.x, self.y, self.width, self.height].iter().all(|v| v.is_multiple_of(8))
    }

    pub fn contains(&self, px: usize, py: usize) -> bool {
        px >= self.x && px < self.right() && py >= self.y && py < self.bottom()
    }

    /// True when `other` lies wholly inside `self`.
    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }
}

/// Per-pixel boolean mask; `true` marks tampered (singly compressed) pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_rect(width: usize, height: usize, rect: &Rect) -> Self {
        let mut m = Self::new(width, height);
        for y in rect.y..rect.bottom().min(height) {
            for x in rect.x..rect.right().min(width) {
                m.set(x, y, true);
            }
        }
        m
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::invalid("mask size does not match its dimensions"));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Number of set pixels inside `rect`.
    pub fn count_in(&self, rect: &Rect) -> usize {
        let mut n = 0;
        for y in rect.y..rect.bottom() {
            let row = &self.bits[y * self.width + rect.x..y * self.width + rect.right()];
            n += row.iter().filter(|&&b| b).count();
        }
        n
    }

    /// 0/255 grayscale rendering.
    pub fn to_image(&self) -> RawImage {
        let px = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        RawImage::new(self.width, self.height, px)
            .expect("mask dimensions come from a valid image")
    }

    /// Pixels >= 128 are set.
    pub fn from_image(img: &RawImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            bits: img.pixels().iter().map(|&p| p >= 128).collect(),
        }
    }
}
