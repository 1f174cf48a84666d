use crate::error::{Error, Result};

/// Natural (row-major) index of each zigzag position, 0-based.
pub const ZIGZAG_TO_NATURAL: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27,
    20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58,
    59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

/// Zigzag position (0-based) of each natural index.
pub const NATURAL_TO_ZIGZAG: [usize; 64] = invert(&ZIGZAG_TO_NATURAL);

const fn invert(table: &[usize; 64]) -> [usize; 64] {
    let mut out = [0usize; 64];
    let mut k = 0;
    while k < 64 {
        out[table[k]] = k;
        k += 1;
    }
    out
}

/// Maps a 1-based zigzag index to its `(row, col)` cell.
pub fn zigzag_order(k: usize) -> Result<(usize, usize)> {
    if !(1..=64).contains(&k) {
        return Err(Error::invalid(format!("zigzag index {k} outside 1..=64")));
    }
    let n = ZIGZAG_TO_NATURAL[k - 1];
    Ok((n / 8, n % 8))
}

/// Inverse of [`zigzag_order`]: the 1-based zigzag index of `(row, col)`.
pub fn zigzag_index(row: usize, col: usize) -> Result<usize> {
    if row >= 8 || col >= 8 {
        return Err(Error::invalid(format!("cell ({row},{col}) outside the 8x8 grid")));
    }
    Ok(NATURAL_TO_ZIGZAG[row * 8 + col] + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_positions() {
        assert_eq!(zigzag_order(1).unwrap(), (0, 0));
        assert_eq!(zigzag_order(2).unwrap(), (0, 1));
        assert_eq!(zigzag_order(3).unwrap(), (1, 0));
        assert_eq!(zigzag_order(64).unwrap(), (7, 7));
        assert!(zigzag_order(0).is_err());
        assert!(zigzag_order(65).is_err());
    }

    #[test]
    fn bijection() {
        let mut seen = [false; 64];
        for k in 1..=64 {
            let (r, c) = zigzag_order(k).unwrap();
            assert!(!seen[r * 8 + c]);
            seen[r * 8 + c] = true;
            assert_eq!(zigzag_index(r, c).unwrap(), k);
        }
    }

    #[test]
    fn walks_antidiagonals() {
        // Consecutive positions move by one step along or across an antidiagonal.
        for k in 1..64 {
            let (r0, c0) = zigzag_order(k).unwrap();
            let (r1, c1) = zigzag_order(k + 1).unwrap();
            let d0 = r0 + c0;
            let d1 = r1 + c1;
            assert!(d1 == d0 || d1 == d0 + 1);
        }
    }
}
