//! Baseline JPEG at the quantized-coefficient level.
//!
//! [`parse_jpeg`] stops after entropy decoding: coefficients come out exactly as
//! stored (no dequantization, no IDCT). [`encode_jpeg`] writes a single-component
//! baseline file with the Annex K default Huffman tables.

mod decoder;
mod encoder;
mod huffman;
mod quant;
mod zigzag;

pub use decoder::parse_jpeg;
pub use encoder::{encode_jpeg, encode_jpeg_with_restarts};
pub use huffman::{HuffmanTable, TableClass};
pub use quant::{quality_to_table, Component, QuantTable, BASE_CHROMINANCE, BASE_LUMINANCE};
pub use zigzag::{zigzag_index, zigzag_order, NATURAL_TO_ZIGZAG, ZIGZAG_TO_NATURAL};

use crate::error::{Error, Result};

/// Smallest quantized value accepted in a block.
pub const COEFF_MIN: i32 = -1024;
/// Largest quantized value accepted in a block.
pub const COEFF_MAX: i32 = 1023;
/// Smallest AC value the baseline Huffman categories can express; only the
/// DC term may reach [`COEFF_MIN`].
pub const AC_MIN: i32 = -1023;

/// One 8x8 block of quantized DCT coefficients, natural (row-major) order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DctBlock {
    pub coeffs: [i16; 64],
}

impl Default for DctBlock {
    fn default() -> Self {
        Self { coeffs: [0; 64] }
    }
}

impl DctBlock {
    /// Coefficient at 1-based zigzag index `k`.
    #[inline]
    pub fn zigzag(&self, k: usize) -> i16 {
        self.coeffs[ZIGZAG_TO_NATURAL[k - 1]]
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> i16 {
        self.coeffs[row * 8 + col]
    }

    pub fn dc(&self) -> i16 {
        self.coeffs[0]
    }
}

/// Quantized luminance coefficients of one image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffImage {
    width: u32,
    height: u32,
    blocks: Vec<DctBlock>,
    quant: QuantTable,
}

impl CoeffImage {
    /// Builds an image from a row-major block grid of `ceil(h/8) x ceil(w/8)` blocks.
    pub fn new(width: u32, height: u32, blocks: Vec<DctBlock>, quant: QuantTable) -> Result<Self> {
        if width == 0 || height == 0 || width > 65535 || height > 65535 {
            return Err(Error::invalid(format!("image size {width}x{height} unsupported")));
        }
        let expected = (width.div_ceil(8) * height.div_ceil(8)) as usize;
        if blocks.len() != expected {
            return Err(Error::invalid(format!(
                "{}x{} image needs {expected} blocks, got {}",
                width,
                height,
                blocks.len()
            )));
        }
        Ok(Self {
            width,
            height,
            blocks,
            quant,
        })
    }

    /// All-zero coefficients.
    pub fn zeros(width: u32, height: u32, quant: QuantTable) -> Result<Self> {
        let n = (width.div_ceil(8) * height.div_ceil(8)) as usize;
        Self::new(width, height, vec![DctBlock::default(); n], quant)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn blocks_wide(&self) -> usize {
        self.width.div_ceil(8) as usize
    }

    pub fn blocks_high(&self) -> usize {
        self.height.div_ceil(8) as usize
    }

    pub fn quant(&self) -> &QuantTable {
        &self.quant
    }

    pub fn blocks(&self) -> &[DctBlock] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [DctBlock] {
        &mut self.blocks
    }

    #[inline]
    pub fn block(&self, block_row: usize, block_col: usize) -> &DctBlock {
        &self.blocks[block_row * self.blocks_wide() + block_col]
    }

    pub fn block_mut(&mut self, block_row: usize, block_col: usize) -> &mut DctBlock {
        let w = self.blocks_wide();
        &mut self.blocks[block_row * w + block_col]
    }
}
