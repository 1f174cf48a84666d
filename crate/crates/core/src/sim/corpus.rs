//! Seeded procedural stand-in for a lossless photo corpus.
//!
//! Each image layers a smooth illumination gradient, multi-octave value noise,
//! a few flat-shaded shapes with their own texture, and fine sensor-like noise,
//! which gives AC coefficient histograms of the peaked, heavy-tailed kind seen
//! in natural photographs.

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RawImage;

/// Default corpus image size, matching the usual 512x384 benchmark images.
pub const DEFAULT_WIDTH: usize = 512;
pub const DEFAULT_HEIGHT: usize = 384;

struct ValueNoise {
    cell: f64,
    cols: usize,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, width: usize, height: usize, cell: f64) -> Self {
        let cols = (width as f64 / cell).ceil() as usize + 2;
        let rows = (height as f64 / cell).ceil() as usize + 2;
        let dist = Uniform::new_inclusive(-1.0, 1.0);
        let lattice = (0..cols * rows).map(|_| dist.sample(rng)).collect();
        Self { cell, cols, lattice }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        let (fx, fy) = (x / self.cell, y / self.cell);
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (tx, ty) = (smooth(fx - ix as f64), smooth(fy - iy as f64));
        let g = |cx: usize, cy: usize| self.lattice[cy * self.cols + cx];
        let top = g(ix, iy) * (1.0 - tx) + g(ix + 1, iy) * tx;
        let bottom = g(ix, iy + 1) * (1.0 - tx) + g(ix + 1, iy + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

enum Shape {
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Rect { x0, y0, x1, y1 } => x >= x0 && x < x1 && y >= y0 && y < y1,
            Shape::Ellipse { cx, cy, rx, ry } => {
                let (dx, dy) = ((x - cx) / rx, (y - cy) / ry);
                dx * dx + dy * dy <= 1.0
            }
        }
    }
}

/// One procedural grayscale image; identical seeds give identical pixels.
pub fn synthesize_image(seed: u64, width: usize, height: usize) -> RawImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_D0C5);
    let (w, h) = (width as f64, height as f64);

    let base = rng.gen_range(70.0..180.0);
    let gx = rng.gen_range(-60.0..60.0) / w;
    let gy = rng.gen_range(-60.0..60.0) / h;

    let octaves: Vec<(ValueNoise, f64)> = [(48.0, 28.0), (20.0, 16.0), (9.0, 10.0), (4.0, 6.0)]
        .iter()
        .map(|&(cell, amp)| {
            let amp = amp * rng.gen_range(0.6..1.4);
            (ValueNoise::new(&mut rng, width, height, cell), amp)
        })
        .collect();

    let n_shapes = rng.gen_range(3..9);
    let shapes: Vec<(Shape, f64, f64)> = (0..n_shapes)
        .map(|_| {
            let cx = rng.gen_range(0.0..w);
            let cy = rng.gen_range(0.0..h);
            let sx = rng.gen_range(0.05..0.3) * w;
            let sy = rng.gen_range(0.05..0.3) * h;
            let shape = if rng.gen_bool(0.5) {
                Shape::Rect {
                    x0: cx - sx,
                    y0: cy - sy,
                    x1: cx + sx,
                    y1: cy + sy,
                }
            } else {
                Shape::Ellipse { cx, cy, rx: sx, ry: sy }
            };
            (shape, rng.gen_range(-50.0..50.0), rng.gen_range(0.3..1.6))
        })
        .collect();

    let grain = rng.gen_range(1.5..4.0);
    let noise = Uniform::new_inclusive(-1.0f64, 1.0);

    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let (fx, fy) = (x as f64, y as f64);
            let mut v = base + gx * fx + gy * fy;
            let mut texture_gain = 1.0;
            for (shape, offset, gain) in &shapes {
                if shape.contains(fx, fy) {
                    v += offset;
                    texture_gain = *gain;
                }
            }
            for (i, (octave, amp)) in octaves.iter().enumerate() {
                let g = if i >= 2 { texture_gain } else { 1.0 };
                v += amp * g * octave.at(fx, fy);
            }
            // Sum of two uniforms: a cheap triangular grain.
            v += grain * (noise.sample(&mut rng) + noise.sample(&mut rng));
            pixels.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    RawImage::new(width, height, pixels).expect("procedural images have valid dimensions")
}

/// `count` images seeded from `seed`, `seed + 1`, ...
pub fn synthesize_corpus(count: usize, seed: u64, width: usize, height: usize) -> Vec<RawImage> {
    use rayon::prelude::*;
    (0..count as u64)
        .into_par_iter()
        .map(|i| synthesize_image(seed.wrapping_add(i), width, height))
        .collect()
}
