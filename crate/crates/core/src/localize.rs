//! Sliding-window tamper maps and their scoring.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_traits::{FromPrimitive, Num};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FEATURE_DIM;
use crate::geom::{BinaryMask, Rect};
use crate::io::FloatRows;
use crate::jpeg::{parse_jpeg, CoeffImage};
use crate::msd::{window_features, MsdModel, Route};
use crate::sim::{ImageRecord, QfPair, RawImage};
use crate::Scalar;

pub const WINDOW: usize = 64;
pub const STRIDE: usize = 8;
pub const CELL: usize = 8;
/// Offset of the central cell inside its window.
pub const CELL_OFFSET: usize = (WINDOW - CELL) / 2;

/// Windows per axis for an `extent`-pixel side.
fn windows_along(extent: usize, l: usize) -> usize {
    (extent - l) / STRIDE + 1
}

/// Number of stride-8 `l`-pixel windows in an `m x n` image.
pub fn count_windows(m: usize, n: usize, l: usize) -> Result<usize> {
    if l == 0 || m < l || n < l {
        return Err(Error::invalid(format!("{m}x{n} image is smaller than the {l}-pixel window")));
    }
    Ok(windows_along(m, l) * windows_along(n, l))
}

/// Top-left corners of all windows, row by row.
pub fn window_origins(width: usize, height: usize) -> Result<Vec<(usize, usize)>> {
    count_windows(width, height, WINDOW)?;
    let (nx, ny) = (windows_along(width, WINDOW), windows_along(height, WINDOW));
    Ok((0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i * STRIDE, j * STRIDE)))
        .collect())
}

/// Pixels that receive a window value; everything outside stays zero.
pub fn covered_region(width: usize, height: usize) -> Result<Rect> {
    count_windows(width, height, WINDOW)?;
    Ok(Rect::new(
        CELL_OFFSET,
        CELL_OFFSET,
        windows_along(width, WINDOW) * STRIDE,
        windows_along(height, WINDOW) * STRIDE,
    ))
}

/// Per-pixel probability that the pixel is singly compressed (tampered).
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl ProbabilityMap {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::invalid("probability map size mismatch"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("probability map values must lie in [0, 1]"));
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }

    fn fill_cell(&mut self, x0: usize, y0: usize, v: f32) {
        for y in y0..y0 + CELL {
            self.values[y * self.width + x0..y * self.width + x0 + CELL].fill(v);
        }
    }

    /// 8-bit rendering, `round(255 p)`.
    pub fn to_image(&self) -> RawImage {
        let px = self.values.iter().map(|&p| (p * 255.0).round() as u8).collect();
        RawImage::new(self.width, self.height, px).expect("map has image dimensions")
    }

    /// Lossless copy as float rows, one per image row.
    pub fn to_rows(&self) -> FloatRows {
        FloatRows {
            dim: self.width,
            values: self.values.clone(),
        }
    }

    pub fn from_rows(rows: &FloatRows) -> Result<Self> {
        Self::from_values(rows.dim, rows.count(), rows.values.clone())
    }
}

/// Route taken by each window, on the window grid (one entry per window).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouteMap {
    pub cols: usize,
    pub rows: usize,
    pub special: Vec<bool>,
}

impl RouteMap {
    pub fn special_count(&self) -> usize {
        self.special.iter().filter(|&&s| s).count()
    }

    pub fn special_fraction(&self) -> f64 {
        self.special_count() as f64 / self.special.len().max(1) as f64
    }

    /// One pixel per window, 255 where the special network decided.
    pub fn to_image(&self) -> RawImage {
        let px = self.special.iter().map(|&s| if s { 255 } else { 0 }).collect();
        RawImage::new(self.cols, self.rows, px).expect("non-empty window grid")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub map: ProbabilityMap,
    pub routes: RouteMap,
    /// Tampered probability per window, in window order.
    pub window_probs: Vec<f32>,
}

impl Detection {
    pub fn windows(&self) -> usize {
        self.window_probs.len()
    }

    /// Mean tampered probability over windows.
    pub fn mean_probability(&self) -> f64 {
        self.window_probs.iter().map(|&p| p as f64).sum::<f64>() / self.windows().max(1) as f64
    }

    pub fn summary(&self) -> String {
        format!(
            "windows={} special_fraction={:.6} mean_probability={:.6}",
            self.windows(),
            self.routes.special_fraction(),
            self.mean_probability()
        )
    }

    /// Writes `<prefix>map.pgm`, `map.f32`, `mask.pgm` and `route.pgm`.
    pub fn write(&self, prefix: &str, threshold: f64) -> Result<()> {
        let mask = binarize(&self.map, threshold)?;
        self.map.to_image().write_pgm(Path::new(&format!("{prefix}map.pgm")))?;
        self.map.to_rows().write(Path::new(&format!("{prefix}map.f32")))?;
        mask.to_image().write_pgm(Path::new(&format!("{prefix}mask.pgm")))?;
        self.routes.to_image().write_pgm(Path::new(&format!("{prefix}route.pgm")))
    }
}

/// Runs the classifier over every window of a JPEG.
pub fn detect<S: Scalar>(model: &MsdModel<S>, jpeg: &[u8]) -> Result<Detection> {
    detect_coeffs(model, &parse_jpeg(jpeg)?)
}

pub fn detect_coeffs<S: Scalar>(model: &MsdModel<S>, c: &CoeffImage) -> Result<Detection> {
    let (w, h) = (c.width() as usize, c.height() as usize);
    let origins = window_origins(w, h)?;
    let n = origins.len();
    let feats: Vec<[Vec<S>; 3]> = origins
        .par_iter()
        .map(|&(x, y)| {
            let f = window_features(c, &Rect::square(x, y, WINDOW))?;
            Ok(f.map(|v| v.values().iter().map(|&a| S::from_f64_lossy(a as f64)).collect()))
        })
        .collect::<Result<_>>()?;
    let mut xs: [Vec<S>; 3] = std::array::from_fn(|_| Vec::with_capacity(n * FEATURE_DIM));
    for f in &feats {
        for k in 0..3 {
            xs[k].extend_from_slice(&f[k]);
        }
    }
    drop(feats);
    let verdicts = model.classify_rows(&xs[0], &xs[1], &xs[2], n, true)?;
    let mut map = ProbabilityMap::zeros(w, h);
    let mut window_probs = Vec::with_capacity(n);
    for (&(x, y), v) in origins.iter().zip(&verdicts) {
        let p = v.tampered_probability().to_f64_lossy().clamp(0.0, 1.0) as f32;
        map.fill_cell(x + CELL_OFFSET, y + CELL_OFFSET, p);
        window_probs.push(p);
    }
    Ok(Detection {
        map,
        routes: RouteMap {
            cols: windows_along(w, WINDOW),
            rows: windows_along(h, WINDOW),
            special: verdicts.iter().map(|v| v.route == Route::Special).collect(),
        },
        window_probs,
    })
}

/// Pixels at or above `threshold` are marked tampered.
pub fn binarize(map: &ProbabilityMap, threshold: f64) -> Result<BinaryMask> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!("threshold {threshold} outside [0, 1]")));
    }
    let bits = map.values.iter().map(|&p| p as f64 >= threshold).collect();
    BinaryMask::from_bits(map.width, map.height, bits)
}

/// Pixel confusion counts with doubly compressed (authentic) as the positive
/// class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

/// Ratio that is undefined when the denominator is zero.
fn ratio<T: Num + Clone + FromPrimitive>(num: T, den: T) -> Option<T> {
    if den.is_zero() {
        None
    } else {
        Some(num / den)
    }
}

fn lift<T: FromPrimitive>(v: u64) -> T {
    T::from_u64(v).expect("count representable")
}

impl ConfusionCounts {
    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }

    pub fn total(&self) -> u64 {
        self.positives() + self.negatives()
    }

    pub fn accuracy<T: Num + Clone + FromPrimitive>(&self) -> Option<T> {
        ratio(lift(self.tp + self.tn), lift(self.total()))
    }

    pub fn precision<T: Num + Clone + FromPrimitive>(&self) -> Option<T> {
        ratio(lift(self.tp), lift(self.tp + self.fp))
    }

    pub fn recall<T: Num + Clone + FromPrimitive>(&self) -> Option<T> {
        ratio(lift(self.tp), lift(self.positives()))
    }

    /// Harmonic mean of precision and recall; undefined if either is, or if
    /// both are zero.
    pub fn f1<T: Num + Clone + FromPrimitive>(&self) -> Option<T> {
        let p: T = self.precision()?;
        let r: T = self.recall()?;
        ratio(lift::<T>(2) * p.clone() * r.clone(), p + r)
    }

    /// Counts with tampered as the positive class.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }

    pub fn add(&mut self, o: &Self) {
        self.tp += o.tp;
        self.tn += o.tn;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

/// Compares a predicted mask with the truth inside `region`. Both masks mark
/// tampered pixels; authentic is the positive class.
pub fn score(predicted: &BinaryMask, truth: &BinaryMask, region: &Rect) -> Result<ConfusionCounts> {
    if predicted.width() != truth.width() || predicted.height() != truth.height() {
        return Err(Error::invalid(format!(
            "mask sizes differ: {}x{} vs {}x{}",
            predicted.width(),
            predicted.height(),
            truth.width(),
            truth.height()
        )));
    }
    if !region.fits_in(truth.width(), truth.height()) {
        return Err(Error::invalid("scoring region outside the masks"));
    }
    let mut c = ConfusionCounts::default();
    for y in region.y..region.bottom() {
        for x in region.x..region.right() {
            match (!predicted.get(x, y), !truth.get(x, y)) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
            }
        }
    }
    Ok(c)
}

/// Scores a detection against its ground truth, excluding the uncovered frame.
pub fn score_detection(det: &Detection, truth: &BinaryMask, threshold: f64) -> Result<ConfusionCounts> {
    let region = covered_region(det.map.width, det.map.height)?;
    score(&binarize(&det.map, threshold)?, truth, &region)
}

/// Per-image metrics in floating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageScore {
    pub pair: QfPair,
    pub counts: ConfusionCounts,
    pub acc: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl ImageScore {
    pub fn new(pair: QfPair, counts: ConfusionCounts) -> Self {
        Self {
            pair,
            counts,
            acc: counts.accuracy(),
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
        }
    }
}

/// One (qf1, qf2) cell: means of per-image metrics over images where each is
/// defined, and summed counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellReport {
    pub pair: QfPair,
    pub images: usize,
    pub acc: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub counts: ConfusionCounts,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qf2Average {
    pub qf2: u8,
    pub cells: usize,
    pub acc: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Default)]
pub struct EvalReport {
    pub threshold: f64,
    pub routing_threshold: f64,
    pub cells: Vec<CellReport>,
    pub per_qf2: Vec<Qf2Average>,
    /// Records that could not be evaluated, with the reason.
    pub errors: Vec<(String, Error)>,
}

pub const REPORT_HEADER: &str = "qf1,qf2,acc,precision,recall,f1,tp,tn,fp,fn";
pub const QF2_HEADER: &str = "qf2,cells,acc,f1";

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"))
}

/// Groups image scores into grid cells and per-qf2 columns.
pub fn aggregate(scores: &[ImageScore]) -> (Vec<CellReport>, Vec<Qf2Average>) {
    let mut groups: BTreeMap<QfPair, Vec<&ImageScore>> = BTreeMap::new();
    for s in scores {
        groups.entry(s.pair).or_default().push(s);
    }
    let cells: Vec<CellReport> = groups
        .into_iter()
        .map(|(pair, v)| {
            let mut counts = ConfusionCounts::default();
            for s in &v {
                counts.add(&s.counts);
            }
            CellReport {
                pair,
                images: v.len(),
                acc: mean(v.iter().map(|s| s.acc)),
                precision: mean(v.iter().map(|s| s.precision)),
                recall: mean(v.iter().map(|s| s.recall)),
                f1: mean(v.iter().map(|s| s.f1)),
                counts,
            }
        })
        .collect();
    let mut cols: BTreeMap<u8, Vec<&CellReport>> = BTreeMap::new();
    for c in &cells {
        cols.entry(c.pair.qf2).or_default().push(c);
    }
    let per_qf2 = cols
        .into_iter()
        .map(|(qf2, v)| Qf2Average {
            qf2,
            cells: v.len(),
            acc: mean(v.iter().map(|c| c.acc)),
            f1: mean(v.iter().map(|c| c.f1)),
        })
        .collect();
    (cells, per_qf2)
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        for c in &self.cells {
            let k = c.counts;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                c.pair.qf1,
                c.pair.qf2,
                fmt_opt(c.acc),
                fmt_opt(c.precision),
                fmt_opt(c.recall),
                fmt_opt(c.f1),
                k.tp,
                k.tn,
                k.fp,
                k.fn_
            );
        }
        out
    }

    pub fn qf2_csv(&self) -> String {
        let mut out = format!("{QF2_HEADER}\n");
        for a in &self.per_qf2 {
            let _ = writeln!(out, "{},{},{},{}", a.qf2, a.cells, fmt_opt(a.acc), fmt_opt(a.f1));
        }
        out
    }
}

/// Detects and scores every listed image (paths relative to `base`).
/// Records that fail are collected in the report instead of aborting.
pub fn evaluate_grid<S: Scalar>(
    model: &MsdModel<S>,
    records: &[ImageRecord],
    base: &Path,
    threshold: f64,
) -> Result<EvalReport> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!("threshold {threshold} outside [0, 1]")));
    }
    let mut scores = Vec::new();
    let mut errors = Vec::new();
    for r in records {
        let run = || -> Result<ImageScore> {
            let jp = base.join(&r.jpeg);
            let bytes = std::fs::read(&jp).map_err(|e| Error::io(&jp, e))?;
            let det = detect(model, &bytes)?;
            let truth = BinaryMask::from_image(&RawImage::read_pgm(&base.join(&r.mask))?);
            let counts = score_detection(&det, &truth, threshold)?;
            Ok(ImageScore::new(r.pair, counts))
        };
        match run() {
            Ok(s) => {
                log::info!("{}: acc {}", r.jpeg, fmt_opt(s.acc));
                scores.push(s);
            }
            Err(e) => {
                log::warn!("{}: {e}", r.jpeg);
                errors.push((r.jpeg.clone(), e));
            }
        }
    }
    let (cells, per_qf2) = aggregate(&scores);
    Ok(EvalReport {
        threshold,
        routing_threshold: model.threshold().to_f64_lossy(),
        cells,
        per_qf2,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jpeg::QuantTable;
    use crate::msd::FusionWeights;
    use crate::nn::{Dense, Layer, Network};
    use num_rational::Ratio;

    #[test]
    fn window_count_examples() {
        assert_eq!(count_windows(512, 384, 64).unwrap(), 57 * 41);
        assert_eq!(count_windows(512, 384, 64).unwrap(), 2337);
        assert_eq!(count_windows(64, 64, 64).unwrap(), 1);
        assert_eq!(count_windows(71, 71, 64).unwrap(), 1);
        assert!(count_windows(63, 100, 64).is_err());
        assert_eq!(window_origins(80, 64).unwrap(), vec![(0, 0), (8, 0), (16, 0)]);
    }

    #[test]
    fn binarize_cases() {
        let zero = ProbabilityMap::zeros(4, 4);
        assert_eq!(binarize(&zero, 0.5).unwrap().count(), 0);
        let half = ProbabilityMap::from_values(2, 1, vec![0.5, 0.49]).unwrap();
        let m = binarize(&half, 0.5).unwrap();
        assert!(m.get(0, 0) && !m.get(1, 0));
        assert_eq!(binarize(&zero, 0.0).unwrap().count(), 16);
        assert!(binarize(&zero, 1.5).is_err());
        assert!(binarize(&zero, -0.1).is_err());
    }

    fn counts(tp: u64, tn: u64, fp: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    #[test]
    fn metric_examples() {
        let c = counts(50, 30, 10, 10);
        assert_eq!(c.accuracy::<Ratio<u64>>(), Some(Ratio::new(4, 5)));
        assert_eq!(c.precision::<Ratio<u64>>(), Some(Ratio::new(5, 6)));
        assert_eq!(c.recall::<Ratio<u64>>(), Some(Ratio::new(5, 6)));
        assert_eq!(c.f1::<Ratio<u64>>(), Some(Ratio::new(5, 6)));
        let perfect = counts(10, 5, 0, 0);
        assert_eq!((perfect.accuracy::<f64>(), perfect.f1::<f64>()), (Some(1.0), Some(1.0)));
        let all_positive = counts(20, 0, 20, 0);
        assert_eq!(all_positive.recall::<f64>(), Some(1.0));
        assert_eq!(all_positive.precision::<f64>(), Some(0.5));
        assert_eq!(all_positive.accuracy::<f64>(), Some(0.5));
    }

    #[test]
    fn undefined_is_not_zero() {
        let c = counts(0, 7, 0, 0);
        assert_eq!(c.precision::<f64>(), None);
        assert_eq!(c.recall::<f64>(), None);
        assert_eq!(c.f1::<f64>(), None);
        assert_eq!(c.accuracy::<f64>(), Some(1.0));
        let c = counts(0, 0, 3, 4);
        assert_eq!(c.precision::<f64>(), Some(0.0));
        assert_eq!(c.f1::<f64>(), None);
        assert_eq!(ConfusionCounts::default().accuracy::<f64>(), None);
    }

    #[test]
    fn score_counts_and_errors() {
        let truth = BinaryMask::from_rect(4, 2, &Rect::new(0, 0, 2, 2));
        let pred = BinaryMask::from_rect(4, 2, &Rect::new(0, 0, 3, 1));
        let c = score(&pred, &truth, &Rect::new(0, 0, 4, 2)).unwrap();
        // authentic positive: truth authentic = columns 2..4
        assert_eq!(c, counts(3, 2, 2, 1));
        assert_eq!(score(&pred, &truth, &Rect::new(0, 0, 4, 1)).unwrap(), counts(1, 2, 0, 1));
        assert!(score(&pred, &BinaryMask::new(3, 2), &Rect::new(0, 0, 3, 2)).is_err());
        assert!(score(&pred, &truth, &Rect::new(0, 0, 5, 2)).is_err());
        assert_eq!(c.swapped().swapped(), c);
        assert_eq!(c.swapped().precision::<f64>(), score_tampered_precision(&pred, &truth));
    }

    fn score_tampered_precision(pred: &BinaryMask, truth: &BinaryMask) -> Option<f64> {
        let both = pred.bits().iter().zip(truth.bits()).filter(|(p, t)| **p && **t).count();
        let predicted = pred.count();
        (predicted > 0).then(|| both as f64 / predicted as f64)
    }

    #[test]
    fn aggregation() {
        let a = QfPair::new(50, 90);
        let b = QfPair::new(90, 90);
        let scores = [
            ImageScore::new(a, counts(8, 2, 0, 0)),
            ImageScore::new(a, counts(4, 2, 2, 2)),
            ImageScore::new(b, counts(0, 5, 5, 0)),
        ];
        let (cells, cols) = aggregate(&scores);
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].images, 2);
        assert!((cells[0].acc.unwrap() - (1.0 + 0.6) / 2.0).abs() < 1e-12);
        assert_eq!(cells[0].counts, counts(12, 4, 2, 2));
        assert_eq!(cells[1].f1, None);
        assert_eq!(cols.len(), 1);
        assert!((cols[0].acc.unwrap() - (0.8 + 0.5) / 2.0).abs() < 1e-12);
        let report = EvalReport {
            cells,
            per_qf2: cols,
            ..EvalReport::default()
        };
        let csv = report.to_csv();
        assert!(csv.starts_with("qf1,qf2,acc,precision,recall,f1,tp,tn,fp,fn\n"));
        assert!(csv.contains("90,90,0.500000,0.000000,undefined,undefined,0,5,5,0"));
    }

    fn model(p: f64) -> MsdModel<f32> {
        let net = |p: f64| {
            let mut d = Dense::zeros(FEATURE_DIM, 2);
            d.bias = vec![(p / (1.0 - p)).ln() as f32, 0.0];
            Network::from_layers(FEATURE_DIM, 1, vec![Layer::Dense(d)]).unwrap()
        };
        MsdModel::new([net(p), net(p), net(p), net(0.3)], FusionWeights::default(), 0.2).unwrap()
    }

    #[test]
    fn map_layout() {
        let c = CoeffImage::zeros(128, 96, QuantTable::unit()).unwrap();
        let det = detect_coeffs(&model(0.9), &c).unwrap();
        assert_eq!(det.windows(), count_windows(128, 96, 64).unwrap());
        let cover = covered_region(128, 96).unwrap();
        assert_eq!(cover, Rect::new(28, 28, 72, 40));
        for y in 0..96 {
            for x in 0..128 {
                let v = det.map.get(x, y);
                if cover.contains(x, y) {
                    assert!((v - 0.9).abs() < 1e-6);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
        assert_eq!(det.routes.special_count(), 0);
        let ambiguous = detect_coeffs(&model(0.55), &c).unwrap();
        assert_eq!(ambiguous.routes.special_fraction(), 1.0);
        assert!((ambiguous.mean_probability() - 0.3).abs() < 1e-6);
    }

    #[test]
    fn single_window_image() {
        let c = CoeffImage::zeros(64, 64, QuantTable::unit()).unwrap();
        let det = detect_coeffs(&model(0.7), &c).unwrap();
        assert_eq!(det.windows(), 1);
        let nonzero = det.map.values().iter().filter(|&&v| v > 0.0).count();
        assert_eq!(nonzero, 64);
        assert!(det.map.get(28, 28) > 0.0 && det.map.get(35, 35) > 0.0 && det.map.get(36, 36) == 0.0);
        assert!(detect_coeffs(&model(0.7), &CoeffImage::zeros(56, 64, QuantTable::unit()).unwrap()).is_err());
    }

    #[test]
    fn map_file_round_trip() {
        let map = ProbabilityMap::from_values(3, 2, vec![0.0, 0.25, 0.5, 0.75, 1.0, 0.1]).unwrap();
        assert_eq!(ProbabilityMap::from_rows(&map.to_rows()).unwrap(), map);
        assert_eq!(map.to_image().pixels(), &[0, 64, 128, 191, 255, 26]);
        assert!(ProbabilityMap::from_values(1, 1, vec![1.5]).is_err());
    }
}
