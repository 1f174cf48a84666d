use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableClass {
    Dc,
    Ac,
}

/// A canonical Huffman table as carried by a DHT segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuffmanTable {
    class: TableClass,
    counts: [u8; 16],
    symbols: Vec<u8>,
    // Decoding: per code length, the largest code (or -1) and the index of its first symbol.
    max_code: [i32; 17],
    val_offset: [i32; 17],
    // Encoding: (code, length) per symbol; length 0 means the symbol is absent.
    codes: [(u16, u8); 256],
}

impl HuffmanTable {
    pub fn new(class: TableClass, counts: [u8; 16], symbols: Vec<u8>) -> Result<Self> {
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        if total != symbols.len() || total > 256 {
            return Err(Error::invalid(format!(
                "Huffman counts sum to {total} but {} symbols given",
                symbols.len()
            )));
        }
        let mut max_code = [-1i32; 17];
        let mut val_offset = [0i32; 17];
        let mut codes = [(0u16, 0u8); 256];
        let mut code: u32 = 0;
        let mut k = 0usize;
        for len in 1..=16usize {
            let n = counts[len - 1] as usize;
            val_offset[len] = k as i32 - code as i32;
            for _ in 0..n {
                let sym = symbols[k] as usize;
                if codes[sym].1 != 0 {
                    return Err(Error::invalid(format!("duplicate Huffman symbol {sym:#04x}")));
                }
                codes[sym] = (code as u16, len as u8);
                code += 1;
                k += 1;
            }
            if n > 0 {
                max_code[len] = code as i32 - 1;
            }
            // Codes of this length must fit; the all-ones code is reserved.
            if code > (1 << len) || (len == 16 && code == 1 << 16) {
                return Err(Error::invalid("Huffman code lengths overflow 16 bits"));
            }
            code <<= 1;
        }
        Ok(Self {
            class,
            counts,
            symbols,
            max_code,
            val_offset,
            codes,
        })
    }

    pub fn class(&self) -> TableClass {
        self.class
    }

    pub fn counts(&self) -> &[u8; 16] {
        &self.counts
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// Code and bit length for `symbol`, if present.
    pub fn code(&self, symbol: u8) -> Option<(u16, u8)> {
        let c = self.codes[symbol as usize];
        (c.1 != 0).then_some(c)
    }

    /// Resolves a code of `len` bits to its symbol, if such a code exists.
    pub(crate) fn lookup(&self, code: i32, len: usize) -> Option<u8> {
        if self.max_code[len] >= 0 && code <= self.max_code[len] {
            let idx = code + self.val_offset[len];
            self.symbols.get(idx as usize).copied()
        } else {
            None
        }
    }

    pub fn std_luminance_dc() -> Self {
        Self::new(TableClass::Dc, STD_DC_LUMA_COUNTS, STD_DC_LUMA_SYMBOLS.to_vec())
            .expect("standard table is valid")
    }

    pub fn std_luminance_ac() -> Self {
        Self::new(TableClass::Ac, STD_AC_LUMA_COUNTS, STD_AC_LUMA_SYMBOLS.to_vec())
            .expect("standard table is valid")
    }
}

pub const STD_DC_LUMA_COUNTS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
pub const STD_DC_LUMA_SYMBOLS: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

pub const STD_AC_LUMA_COUNTS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d];
pub const STD_AC_LUMA_SYMBOLS: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
    0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
    0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
    0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
    0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
    0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_dc_codes() {
        let t = HuffmanTable::std_luminance_dc();
        // Table K.3: category 0 is '00', category 1 is '010', category 11 is '111111110'.
        assert_eq!(t.code(0), Some((0b00, 2)));
        assert_eq!(t.code(1), Some((0b010, 3)));
        assert_eq!(t.code(11), Some((0b1_1111_1110, 9)));
        assert_eq!(t.code(12), None);
    }

    #[test]
    fn standard_ac_codes() {
        let t = HuffmanTable::std_luminance_ac();
        // Table K.5: EOB is '1010', ZRL is '11111111001'.
        assert_eq!(t.code(0x00), Some((0b1010, 4)));
        assert_eq!(t.code(0xF0), Some((0b111_1111_1001, 11)));
        assert_eq!(t.code(0x01), Some((0b00, 2)));
    }

    #[test]
    fn lookup_inverts_code() {
        for t in [HuffmanTable::std_luminance_dc(), HuffmanTable::std_luminance_ac()] {
            for &s in t.symbols() {
                let (code, len) = t.code(s).unwrap();
                assert_eq!(t.lookup(code as i32, len as usize), Some(s));
            }
        }
    }

    #[test]
    fn rejects_inconsistent_counts() {
        assert!(HuffmanTable::new(TableClass::Dc, [1; 16], vec![0, 1]).is_err());
        // Three codes of length 1 cannot exist.
        let mut counts = [0u8; 16];
        counts[0] = 3;
        assert!(HuffmanTable::new(TableClass::Dc, counts, vec![0, 1, 2]).is_err());
    }
}
