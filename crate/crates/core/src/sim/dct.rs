//! Orthonormal 8x8 type-II DCT with the JPEG level shift.

use crate::Scalar;

fn basis<S: Scalar>() -> [[S; 8]; 8] {
    // basis[u][x] = c(u)/2 * cos((2x+1) u pi / 16)
    let mut t = [[S::zero(); 8]; 8];
    for (u, row) in t.iter_mut().enumerate() {
        let cu = if u == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
        for (x, v) in row.iter_mut().enumerate() {
            let angle = (2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0;
            *v = S::from_f64_lossy(0.5 * cu * angle.cos());
        }
    }
    t
}

/// Forward DCT of level-shifted samples (`sample - 128`), row-major in and out.
pub fn fdct8x8<S: Scalar>(samples: &[u8; 64]) -> [S; 64] {
    let b = basis::<S>();
    let shift = S::from_f64_lossy(128.0);
    let mut tmp = [S::zero(); 64];
    // rows: tmp[y][u] = sum_x b[u][x] * s[y][x]
    for y in 0..8 {
        for u in 0..8 {
            let mut acc = S::zero();
            for x in 0..8 {
                acc += b[u][x] * (S::from_f64_lossy(f64::from(samples[y * 8 + x])) - shift);
            }
            tmp[y * 8 + u] = acc;
        }
    }
    let mut out = [S::zero(); 64];
    for v in 0..8 {
        for u in 0..8 {
            let mut acc = S::zero();
            for y in 0..8 {
                acc += b[v][y] * tmp[y * 8 + u];
            }
            out[v * 8 + u] = acc;
        }
    }
    out
}

/// Inverse DCT without level shift or rounding.
pub fn idct8x8_real<S: Scalar>(coeffs: &[S; 64]) -> [S; 64] {
    let b = basis::<S>();
    let mut tmp = [S::zero(); 64];
    for v in 0..8 {
        for x in 0..8 {
            let mut acc = S::zero();
            for u in 0..8 {
                acc += b[u][x] * coeffs[v * 8 + u];
            }
            tmp[v * 8 + x] = acc;
        }
    }
    let mut out = [S::zero(); 64];
    for y in 0..8 {
        for x in 0..8 {
            let mut acc = S::zero();
            for v in 0..8 {
                acc += b[v][y] * tmp[v * 8 + x];
            }
            out[y * 8 + x] = acc;
        }
    }
    out
}

/// Inverse DCT back to 8-bit samples: adds 128, rounds half away from zero, clamps.
pub fn idct8x8<S: Scalar>(coeffs: &[S; 64]) -> [u8; 64] {
    let real = idct8x8_real(coeffs);
    let mut out = [0u8; 64];
    for (o, v) in out.iter_mut().zip(real.iter()) {
        let p = v.to_f64_lossy() + 128.0;
        *o = p.round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// `round(value / step)` with halves rounded away from zero.
#[inline]
pub fn quantize(value: f64, step: u16) -> i32 {
    (value / f64::from(step)).round() as i32
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_block_is_pure_dc() {
        for v in [0u8, 17, 128, 200, 255] {
            let c = fdct8x8::<f64>(&[v; 64]);
            assert!((c[0] - 8.0 * (f64::from(v) - 128.0)).abs() < 1e-9);
            assert!(c[1..].iter().all(|x| x.abs() < 1e-9));
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut b = [0u8; 64];
            rng.fill(&mut b[..]);
            let c = fdct8x8::<f64>(&b);
            assert_eq!(idct8x8(&c), b);
            let energy: f64 = c.iter().map(|x| x * x).sum();
            let spatial: f64 = b.iter().map(|&s| (f64::from(s) - 128.0).powi(2)).sum();
            assert!((energy - spatial).abs() <= 1e-6 * spatial.max(1.0));
        }
    }

    #[test]
    fn single_precision_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut b = [0u8; 64];
        rng.fill(&mut b[..]);
        assert_eq!(idct8x8(&fdct8x8::<f32>(&b)), b);
    }

    #[test]
    fn quantize_rounds_half_away() {
        assert_eq!(quantize(7.0, 3), 2);
        assert_eq!(quantize(1.5, 1), 2);
        assert_eq!(quantize(-1.5, 1), -2);
        assert_eq!(quantize(-7.0, 3), -2);
    }
}
