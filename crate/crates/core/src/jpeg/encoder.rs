use super::huffman::{HuffmanTable, STD_AC_LUMA_COUNTS, STD_AC_LUMA_SYMBOLS, STD_DC_LUMA_COUNTS, STD_DC_LUMA_SYMBOLS};
use super::zigzag::ZIGZAG_TO_NATURAL;
use super::{CoeffImage, DctBlock, AC_MIN, COEFF_MAX, COEFF_MIN};
use crate::error::{Error, Result};

/// Writes `c` as a single-component baseline JPEG.
pub fn encode_jpeg(c: &CoeffImage) -> Result<Vec<u8>> {
    encode_jpeg_with_restarts(c, 0)
}

/// Like [`encode_jpeg`], inserting an RST marker every `interval` blocks (0 disables).
pub fn encode_jpeg_with_restarts(c: &CoeffImage, interval: u16) -> Result<Vec<u8>> {
    for (i, b) in c.blocks().iter().enumerate() {
        let dc = i32::from(b.coeffs[0]);
        if !(COEFF_MIN..=COEFF_MAX).contains(&dc) {
            return Err(Error::invalid(format!(
                "block {i} DC coefficient {dc} outside [{COEFF_MIN}, {COEFF_MAX}]"
            )));
        }
        if let Some(v) = b.coeffs[1..]
            .iter()
            .find(|&&v| !(AC_MIN..=COEFF_MAX).contains(&i32::from(v)))
        {
            return Err(Error::invalid(format!(
                "block {i} AC coefficient {v} outside [{AC_MIN}, {COEFF_MAX}]"
            )));
        }
    }
    let dc = HuffmanTable::std_luminance_dc();
    let ac = HuffmanTable::std_luminance_ac();

    let mut out = Vec::with_capacity(1024 + c.blocks().len() * 16);
    out.extend_from_slice(&[0xFF, 0xD8]);
    // JFIF APP0, version 1.01, no density, no thumbnail.
    out.extend_from_slice(&[
        0xFF, 0xE0, 0x00, 0x10, b'J', b'F', b'I', b'F', 0x00, 0x01, 0x01, 0x00, 0x00, 0x01, 0x00,
        0x01, 0x00, 0x00,
    ]);

    out.extend_from_slice(&[0xFF, 0xDB, 0x00, 0x43, 0x00]);
    let steps = c.quant().steps();
    out.extend(ZIGZAG_TO_NATURAL.iter().map(|&n| steps[n] as u8));

    out.extend_from_slice(&[0xFF, 0xC0, 0x00, 0x0B, 0x08]);
    out.extend_from_slice(&(c.height() as u16).to_be_bytes());
    out.extend_from_slice(&(c.width() as u16).to_be_bytes());
    out.extend_from_slice(&[0x01, 0x01, 0x11, 0x00]);

    write_dht(&mut out, 0x00, &STD_DC_LUMA_COUNTS, &STD_DC_LUMA_SYMBOLS);
    write_dht(&mut out, 0x10, &STD_AC_LUMA_COUNTS, &STD_AC_LUMA_SYMBOLS);

    if interval > 0 {
        out.extend_from_slice(&[0xFF, 0xDD, 0x00, 0x04]);
        out.extend_from_slice(&interval.to_be_bytes());
    }

    out.extend_from_slice(&[0xFF, 0xDA, 0x00, 0x08, 0x01, 0x01, 0x00, 0x00, 0x3F, 0x00]);

    let mut w = BitWriter::new(out);
    let mut pred = 0i32;
    let mut rst = 0u8;
    for (i, block) in c.blocks().iter().enumerate() {
        if interval > 0 && i > 0 && i % interval as usize == 0 {
            w.flush();
            w.out.extend_from_slice(&[0xFF, 0xD0 + rst]);
            rst = (rst + 1) & 7;
            pred = 0;
        }
        encode_block(&mut w, block, &mut pred, &dc, &ac);
    }
    w.flush();
    let mut out = w.out;
    out.extend_from_slice(&[0xFF, 0xD9]);
    Ok(out)
}

fn write_dht(out: &mut Vec<u8>, class_slot: u8, counts: &[u8; 16], symbols: &[u8]) {
    let len = 2 + 1 + 16 + symbols.len();
    out.extend_from_slice(&[0xFF, 0xC4]);
    out.extend_from_slice(&(len as u16).to_be_bytes());
    out.push(class_slot);
    out.extend_from_slice(counts);
    out.extend_from_slice(symbols);
}

/// Magnitude category and the low bits that encode `v`.
fn category(v: i32) -> (u8, u32) {
    if v == 0 {
        return (0, 0);
    }
    let size = 32 - v.unsigned_abs().leading_zeros();
    let bits = if v < 0 { (v - 1) as u32 } else { v as u32 } & ((1u32 << size) - 1);
    (size as u8, bits)
}

fn encode_block(w: &mut BitWriter, block: &DctBlock, pred: &mut i32, dc: &HuffmanTable, ac: &HuffmanTable) {
    let dcv = i32::from(block.coeffs[0]);
    let (size, bits) = category(dcv - *pred);
    *pred = dcv;
    w.put_symbol(dc, size);
    w.put(bits, size);

    let mut run = 0u8;
    for &n in &ZIGZAG_TO_NATURAL[1..] {
        let v = i32::from(block.coeffs[n]);
        if v == 0 {
            run += 1;
            continue;
        }
        while run >= 16 {
            w.put_symbol(ac, 0xF0);
            run -= 16;
        }
        let (size, bits) = category(v);
        w.put_symbol(ac, (run << 4) | size);
        w.put(bits, size);
        run = 0;
    }
    if run > 0 {
        w.put_symbol(ac, 0x00);
    }
}

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    n: u32,
}

impl BitWriter {
    fn new(out: Vec<u8>) -> Self {
        Self { out, acc: 0, n: 0 }
    }

    fn put(&mut self, bits: u32, len: u8) {
        for i in (0..u32::from(len)).rev() {
            self.acc = (self.acc << 1) | ((bits >> i) & 1);
            self.n += 1;
            if self.n == 8 {
                self.emit();
            }
        }
    }

    fn put_symbol(&mut self, table: &HuffmanTable, symbol: u8) {
        let (code, len) = table
            .code(symbol)
            .expect("standard tables cover every baseline symbol");
        self.put(u32::from(code), len);
    }

    fn emit(&mut self) {
        let b = self.acc as u8;
        self.out.push(b);
        if b == 0xFF {
            self.out.push(0x00);
        }
        self.acc = 0;
        self.n = 0;
    }

    /// Pads the final partial byte with one bits.
    fn flush(&mut self) {
        if self.n > 0 {
            let pad = 8 - self.n;
            self.put((1 << pad) - 1, pad as u8);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories() {
        assert_eq!(category(0), (0, 0));
        assert_eq!(category(1), (1, 1));
        assert_eq!(category(-1), (1, 0));
        assert_eq!(category(3), (2, 3));
        assert_eq!(category(-3), (2, 0));
        assert_eq!(category(-1024), (11, 1023));
        assert_eq!(category(1023), (10, 1023));
        assert_eq!(category(2047), (11, 2047));
    }
}
