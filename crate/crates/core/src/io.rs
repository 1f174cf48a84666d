//! Little-endian float array files.
//!
//! Layout: 4-byte magic `DJFV`, then `version`, `count`, `dim` as u32, then
//! `count * dim` f32 values row by row. Feature sets store one feature vector
//! per row; probability map sidecars store one image row per row.

use std::path::Path;

use crate::error::{Error, Result};

pub const FLOAT_MAGIC: &[u8; 4] = b"DJFV";
pub const FLOAT_VERSION: u32 = 1;

/// A dense row-major matrix of `f32`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatRows {
    pub dim: usize,
    pub values: Vec<f32>,
}

impl FloatRows {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            values: Vec::new(),
        }
    }

    pub fn count(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, row: &[f32]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::invalid(format!("row of {} values, expected {}", row.len(), self.dim)));
        }
        self.values.extend_from_slice(row);
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.values.len());
        out.extend_from_slice(FLOAT_MAGIC);
        out.extend_from_slice(&FLOAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.count() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 {
            return Err(Error::Format("float file shorter than its header".into()));
        }
        if &bytes[..4] != FLOAT_MAGIC {
            return Err(Error::Format("bad float file magic".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let version = word(4);
        if version != FLOAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let (count, dim) = (word(8) as usize, word(12) as usize);
        let expected = 16 + 4 * count * dim;
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "float file holds {} bytes, header implies {expected}",
                bytes.len()
            )));
        }
        let values = bytes[16..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Ok(Self { dim, values })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let mut rows = FloatRows::new(2);
        rows.push(&[1.0, -2.5]).unwrap();
        let b = rows.to_bytes();
        assert_eq!(&b[..4], b"DJFV");
        assert_eq!(&b[4..16], &[1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(FloatRows::from_bytes(&b).unwrap(), rows);
    }

    #[test]
    fn rejects_damage() {
        let mut rows = FloatRows::new(3);
        rows.push(&[0.0; 3]).unwrap();
        let b = rows.to_bytes();
        assert!(FloatRows::from_bytes(&b[..b.len() - 1]).is_err());
        let mut v2 = b.clone();
        v2[4] = 2;
        assert!(matches!(FloatRows::from_bytes(&v2), Err(Error::UnsupportedVersion(2))));
        assert!(rows.push(&[1.0]).is_err());
    }
}
