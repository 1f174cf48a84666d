use djf_core::geom::{BinaryMask, Rect};
use djf_core::localize::{count_windows, covered_region, score, ConfusionCounts};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every top-left corner on the 8-pixel lattice whose window fits.
fn enumerate_windows(m: usize, n: usize, l: usize) -> usize {
    let mut count = 0;
    let mut y = 0;
    while y + l <= n {
        let mut x = 0;
        while x + l <= m {
            count += 1;
            x += 8;
        }
        y += 8;
    }
    count
}

#[test]
fn window_count_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let (m, n) = (rng.gen_range(64..=1024), rng.gen_range(64..=1024));
        assert_eq!(count_windows(m, n, 64).unwrap(), enumerate_windows(m, n, 64), "{m}x{n}");
    }
    assert_eq!(count_windows(512, 384, 64).unwrap(), 2337);
}

#[test]
fn covered_region_is_the_union_of_central_cells() {
    for (m, n) in [(64, 64), (71, 90), (512, 384), (200, 136)] {
        let r = covered_region(m, n).unwrap();
        let mut cells = BinaryMask::new(m, n);
        for y in (0..=n - 64).step_by(8) {
            for x in (0..=m - 64).step_by(8) {
                for dy in 0..8 {
                    for dx in 0..8 {
                        cells.set(x + 28 + dx, y + 28 + dy, true);
                    }
                }
            }
        }
        assert_eq!(cells, BinaryMask::from_rect(m, n, &r));
    }
}

fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize) -> BinaryMask {
    BinaryMask::from_bits(w, h, (0..w * h).map(|_| rng.gen_bool(0.4)).collect()).unwrap()
}

proptest! {
    #[test]
    fn score_matches_naive_counter(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (rng.gen_range(1..20), rng.gen_range(1..20));
        let pred = random_mask(&mut rng, w, h);
        let truth = random_mask(&mut rng, w, h);
        let c = score(&pred, &truth, &Rect::new(0, 0, w, h)).unwrap();
        let mut naive = ConfusionCounts::default();
        for (&p, &t) in pred.bits().iter().zip(truth.bits()) {
            // Positive = authentic = bit clear.
            match (!p, !t) {
                (true, true) => naive.tp += 1,
                (false, false) => naive.tn += 1,
                (true, false) => naive.fp += 1,
                (false, true) => naive.fn_ += 1,
            }
        }
        prop_assert_eq!(c, naive);
        prop_assert_eq!(c.tp + c.fn_, truth.bits().iter().filter(|b| !**b).count() as u64);

        // Flipping which class counts as positive swaps precision and recall
        // of the tampered class onto the counts of the inverted masks.
        let inv = |m: &BinaryMask| BinaryMask::from_bits(w, h, m.bits().iter().map(|b| !b).collect()).unwrap();
        let flipped = score(&inv(&pred), &inv(&truth), &Rect::new(0, 0, w, h)).unwrap();
        prop_assert_eq!(flipped, c.swapped());
        prop_assert_eq!(flipped.precision::<Ratio<u64>>(), c.swapped().precision());
        prop_assert_eq!(c.precision::<Ratio<u64>>(), flipped.swapped().precision());
    }

    #[test]
    fn rates_within_unit_interval(tp in 0u64..500, tn in 0u64..500, fp in 0u64..500, fn_ in 0u64..500) {
        let c = ConfusionCounts { tp, tn, fp, fn_ };
        for v in [c.accuracy::<f64>(), c.precision(), c.recall(), c.f1()].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}

#[test]
fn fifty_random_configurations_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let c = ConfusionCounts {
            tp: rng.gen_range(0..1000),
            tn: rng.gen_range(0..1000),
            fp: rng.gen_range(0..1000),
            fn_: rng.gen_range(0..1000),
        };
        let r = |a: u64, b: u64| (b != 0).then(|| Ratio::new(a, b));
        assert_eq!(c.accuracy(), r(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn_));
        let p = r(c.tp, c.tp + c.fp);
        let rec = r(c.tp, c.tp + c.fn_);
        assert_eq!(c.precision(), p);
        assert_eq!(c.recall(), rec);
        let f1 = match (p, rec) {
            (Some(p), Some(q)) if p + q != Ratio::from_integer(0) => Some(Ratio::from_integer(2) * p * q / (p + q)),
            _ => None,
        };
        assert_eq!(c.f1(), f1);
    }
}

#[test]
fn random_guess_is_near_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 4000;
    let truth = BinaryMask::from_bits(n, 1, (0..n).map(|i| i % 2 == 0).collect()).unwrap();
    let guess = random_mask(&mut rng, n, 1);
    let acc: f64 = score(&guess, &truth, &Rect::new(0, 0, n, 1)).unwrap().accuracy().unwrap();
    assert!((0.45..=0.55).contains(&acc), "{acc}");
}
