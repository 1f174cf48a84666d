use crate::error::{Error, Result};

/// Annex K luminance base table, natural order.
pub const BASE_LUMINANCE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Annex K chrominance base table, natural order.
pub const BASE_CHROMINANCE: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99, //
    18, 21, 26, 66, 99, 99, 99, 99, //
    24, 26, 56, 99, 99, 99, 99, 99, //
    47, 66, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Luminance,
    Chrominance,
}

/// 8x8 quantization steps in natural (row-major) order.
///
/// Steps are in `1..=255`: only 8-bit precision tables are produced or accepted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantTable {
    steps: [u16; 64],
    id: u8,
}

impl QuantTable {
    pub fn new(steps: [u16; 64], id: u8) -> Result<Self> {
        if id > 3 {
            return Err(Error::invalid(format!("quantization table slot {id} > 3")));
        }
        if let Some(bad) = steps.iter().find(|&&s| s == 0 || s > 255) {
            return Err(Error::invalid(format!("quantization step {bad} outside 1..=255")));
        }
        Ok(Self { steps, id })
    }

    /// All-ones table, i.e. no quantization loss beyond rounding.
    pub fn unit() -> Self {
        Self { steps: [1; 64], id: 0 }
    }

    pub fn steps(&self) -> &[u16; 64] {
        &self.steps
    }

    pub fn step(&self, row: usize, col: usize) -> u16 {
        self.steps[row * 8 + col]
    }

    pub fn id(&self) -> u8 {
        self.id
    }
}

/// Scales the Annex K base table the way the IJG reference encoder does.
pub fn quality_to_table(qf: u8, component: Component) -> Result<QuantTable> {
    if !(1..=100).contains(&qf) {
        return Err(Error::invalid(format!("quality factor {qf} outside 1..=100")));
    }
    let qf = u32::from(qf);
    let scale = if qf < 50 { 5000 / qf } else { 200 - 2 * qf };
    let (base, id) = match component {
        Component::Luminance => (&BASE_LUMINANCE, 0),
        Component::Chrominance => (&BASE_CHROMINANCE, 1),
    };
    let mut steps = [0u16; 64];
    for (dst, &b) in steps.iter_mut().zip(base) {
        *dst = ((u32::from(b) * scale + 50) / 100).clamp(1, 255) as u16;
    }
    Ok(QuantTable { steps, id })
}
