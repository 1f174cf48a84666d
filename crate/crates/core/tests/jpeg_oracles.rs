use djf_core::jpeg::{
    encode_jpeg, encode_jpeg_with_restarts, parse_jpeg, quality_to_table, CoeffImage, Component, DctBlock,
    QuantTable, AC_MIN, BASE_LUMINANCE, COEFF_MAX, COEFF_MIN,
};
use djf_core::sim::{compress_once, synthesize_image, RawImage};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(seed: u64) -> CoeffImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = rng.gen_range(1..=48u32);
    let height = rng.gen_range(1..=48u32);
    let n = (width.div_ceil(8) * height.div_ceil(8)) as usize;
    let mut blocks = vec![DctBlock::default(); n];
    for b in &mut blocks {
        for (k, v) in b.coeffs.iter_mut().enumerate() {
            let lo = if k == 0 { COEFF_MIN } else { AC_MIN };
            // Mostly small values with occasional extremes and long zero runs.
            *v = match rng.gen_range(0..10) {
                0..=4 => 0,
                5..=7 => rng.gen_range(-8..=8),
                8 => rng.gen_range(-200..=200),
                _ => rng.gen_range(lo..=COEFF_MAX) as i16,
            };
        }
        if rng.gen_bool(0.05) {
            b.coeffs[0] = COEFF_MIN as i16;
        }
    }
    let qf = rng.gen_range(1..=100);
    CoeffImage::new(width, height, blocks, quality_to_table(qf, Component::Luminance).unwrap()).unwrap()
}

#[test]
fn five_hundred_round_trips_and_reference_decoder_accepts() {
    for seed in 0..500 {
        let c = random_image(seed);
        let bytes = encode_jpeg(&c).unwrap();
        assert_eq!(parse_jpeg(&bytes).unwrap(), c, "seed {seed}");
        let mut dec = jpeg_decoder::Decoder::new(std::io::Cursor::new(&bytes));
        let pixels = dec.decode().unwrap_or_else(|e| panic!("seed {seed}: reference decoder rejected: {e}"));
        let info = dec.info().unwrap();
        assert_eq!((info.width as u32, info.height as u32), (c.width(), c.height()));
        assert_eq!(pixels.len(), (c.width() * c.height()) as usize);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_with_restart_intervals(seed in any::<u64>(), interval in 1u16..5) {
        let c = random_image(seed);
        let bytes = encode_jpeg_with_restarts(&c, interval).unwrap();
        prop_assert!(bytes.windows(2).any(|w| w[0] == 0xFF && w[1] == 0xDD));
        prop_assert_eq!(parse_jpeg(&bytes).unwrap(), c);
        prop_assert!(jpeg_decoder::Decoder::new(std::io::Cursor::new(&bytes)).decode().is_ok());
    }

    #[test]
    fn truncation_never_panics(seed in 0u64..1000, cut in 0usize..400) {
        let bytes = encode_jpeg(&random_image(seed)).unwrap();
        let cut = cut.min(bytes.len() - 1);
        let _ = parse_jpeg(&bytes[..cut]);
    }
}

#[test]
fn decoded_pixels_agree_with_reference_decoder() {
    let img = synthesize_image(3, 64, 48);
    for qf in [50, 75, 95] {
        let (c, ours) = compress_once(&img, qf).unwrap();
        let bytes = encode_jpeg(&c).unwrap();
        let theirs = jpeg_decoder::Decoder::new(std::io::Cursor::new(&bytes)).decode().unwrap();
        let worst = ours.pixels().iter().zip(&theirs).map(|(&a, &b)| (a as i32 - b as i32).abs()).max().unwrap();
        assert!(worst <= 2, "qf {qf}: max pixel difference {worst}");
    }
}

fn reference_encode(pixels: &[u8], w: u16, h: u16, quality: u8) -> Vec<u8> {
    let mut out = Vec::new();
    let enc = jpeg_encoder::Encoder::new(&mut out, quality);
    enc.encode(pixels, w, h, jpeg_encoder::ColorType::Luma).unwrap();
    out
}

#[test]
fn reference_encoder_qf50_uses_base_table() {
    let img = synthesize_image(1, 32, 32);
    let c = parse_jpeg(&reference_encode(img.pixels(), 32, 32, 50)).unwrap();
    assert_eq!(c.quant().steps(), &BASE_LUMINANCE);
    for qf in [10, 75, 90] {
        let c = parse_jpeg(&reference_encode(img.pixels(), 32, 32, qf)).unwrap();
        assert_eq!(c.quant().steps(), quality_to_table(qf, Component::Luminance).unwrap().steps(), "qf {qf}");
    }
}

#[test]
fn reference_encoder_mid_gray_is_all_zero() {
    let c = parse_jpeg(&reference_encode(&[128; 64], 8, 8, 50)).unwrap();
    assert_eq!(c.blocks().len(), 1);
    assert!(c.blocks()[0].coeffs.iter().all(|&v| v == 0));
    let flat = RawImage::filled(8, 8, 128).unwrap();
    let (ours, _) = compress_once(&flat, 50).unwrap();
    assert_eq!(ours.blocks(), c.blocks());
}

#[test]
fn reference_encoder_coefficients_match_ours_closely() {
    // Same quantization, different DCT implementation: nearly every
    // coefficient should agree exactly.
    let img = synthesize_image(9, 64, 64);
    let theirs = parse_jpeg(&reference_encode(img.pixels(), 64, 64, 75)).unwrap();
    let (ours, _) = compress_once(&img, 75).unwrap();
    let total = ours.blocks().len() * 64;
    let differ: usize = ours
        .blocks()
        .iter()
        .zip(theirs.blocks())
        .map(|(a, b)| a.coeffs.iter().zip(&b.coeffs).filter(|(x, y)| x != y).count())
        .sum();
    assert!(differ * 50 < total, "{differ} of {total} coefficients differ");
    let max_gap = ours
        .blocks()
        .iter()
        .zip(theirs.blocks())
        .flat_map(|(a, b)| a.coeffs.iter().zip(b.coeffs).map(|(x, y)| (x - y).abs()))
        .max()
        .unwrap();
    assert!(max_gap <= 1);
}

#[test]
fn out_of_range_ac_is_an_error() {
    let mut c = CoeffImage::zeros(8, 8, QuantTable::unit()).unwrap();
    c.blocks_mut()[0].coeffs[5] = -1024;
    assert!(encode_jpeg(&c).is_err());
    c.blocks_mut()[0].coeffs[5] = 0;
    c.blocks_mut()[0].coeffs[0] = -1024;
    assert_eq!(parse_jpeg(&encode_jpeg(&c).unwrap()).unwrap(), c);
}

#[test]
fn unit_table_encodes() {
    let c = CoeffImage::zeros(16, 8, QuantTable::unit()).unwrap();
    assert_eq!(parse_jpeg(&encode_jpeg(&c).unwrap()).unwrap(), c);
}
