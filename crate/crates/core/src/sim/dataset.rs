//! Block datasets built from tampered images.
//!
//! Every corpus image is tampered once per `(qf1, qf2)` pair with its left half
//! pasted back from the original, so the left half is singly compressed and the
//! right half doubly compressed. Non-overlapping square blocks wholly on either
//! side become labeled samples; blocks straddling the seam are skipped.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tamper::{tamper_and_recompress, TamperSpec};
use super::RawImage;
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureVector, FEATURE_DIM};
use crate::geom::{BinaryMask, Rect};
use crate::io::FloatRows;
use crate::jpeg::parse_jpeg;

/// The quality factors used for dataset grids: 50, 55, ..., 95.
pub const DEFAULT_QF_VALUES: [u8; 10] = [50, 55, 60, 65, 70, 75, 80, 85, 90, 95];
pub const DEFAULT_SCALES: [usize; 3] = [64, 128, 256];
pub const SPECIAL_SET: &str = "special";

/// Block class. Network output 0 is the tampered probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Authentic,
    Tampered,
}

impl Label {
    pub fn class_index(self) -> usize {
        match self {
            Label::Tampered => 0,
            Label::Authentic => 1,
        }
    }

    pub fn from_class_index(i: usize) -> Self {
        if i == 0 {
            Label::Tampered
        } else {
            Label::Authentic
        }
    }

    /// Manifest encoding: 1 tampered, 0 authentic.
    pub fn as_flag(self) -> u8 {
        match self {
            Label::Tampered => 1,
            Label::Authentic => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QfPair {
    pub qf1: u8,
    pub qf2: u8,
}

impl QfPair {
    pub const fn new(qf1: u8, qf2: u8) -> Self {
        Self { qf1, qf2 }
    }

    /// Every ordered pair over `values`, qf1-major.
    pub fn grid(values: &[u8]) -> Vec<QfPair> {
        values
            .iter()
            .flat_map(|&a| values.iter().map(move |&b| QfPair::new(a, b)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
        })
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            _ => Err(Error::Format(format!("unknown split {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSample {
    pub features: FeatureVector,
    pub label: Label,
    pub pair: QfPair,
    pub scale: usize,
    pub x: usize,
    pub y: usize,
    pub image: usize,
    pub split: Split,
}

/// One line of a block manifest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestRecord {
    /// Tampered JPEG, relative to the dataset directory.
    pub path: String,
    pub label: Label,
    pub qf1: u8,
    pub qf2: u8,
    pub scale: usize,
    pub x: usize,
    pub y: usize,
    pub split: Split,
}

pub const MANIFEST_HEADER: &str = "path,label,qf1,qf2,scale,x,y,split";

/// Line-delimited block records; row `i` pairs with row `i` of the feature file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

fn field<T: FromStr>(s: &str, line: usize, name: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: bad {name} {s:?}")))
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(MANIFEST_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.path,
                r.label.as_flag(),
                r.qf1,
                r.qf2,
                r.scale,
                r.x,
                r.y,
                r.split
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || (i == 0 && line.starts_with("path,")) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 8 {
                return Err(Error::Format(format!("line {line_no}: expected 8 columns, got {}", cols.len())));
            }
            let label = match cols[1].trim() {
                "1" => Label::Tampered,
                "0" => Label::Authentic,
                other => return Err(Error::Format(format!("line {line_no}: bad label {other:?}"))),
            };
            records.push(ManifestRecord {
                path: cols[0].to_string(),
                label,
                qf1: field(cols[2], line_no, "qf1")?,
                qf2: field(cols[3], line_no, "qf2")?,
                scale: field(cols[4], line_no, "scale")?,
                x: field(cols[5], line_no, "x")?,
                y: field(cols[6], line_no, "y")?,
                split: cols[7].trim().parse()?,
            });
        }
        Ok(Self { records })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// One tampered image of the dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageRecord {
    pub jpeg: String,
    pub mask: String,
    pub pair: QfPair,
    pub image: usize,
    pub split: Split,
}

pub const IMAGES_HEADER: &str = "jpeg,mask,qf1,qf2,image,split";

pub fn images_to_csv(images: &[ImageRecord]) -> String {
    let mut out = String::from(IMAGES_HEADER);
    out.push('\n');
    for r in images {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.jpeg, r.mask, r.pair.qf1, r.pair.qf2, r.image, r.split
        ));
    }
    out
}

/// Parses an image list; malformed lines are returned as per-line errors.
pub fn images_from_csv(text: &str) -> (Vec<ImageRecord>, Vec<Error>) {
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || (i == 0 && line.starts_with("jpeg,")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let parsed = (|| -> Result<ImageRecord> {
            if cols.len() != 6 {
                return Err(Error::Format(format!("line {line_no}: expected 6 columns, got {}", cols.len())));
            }
            Ok(ImageRecord {
                jpeg: cols[0].to_string(),
                mask: cols[1].to_string(),
                pair: QfPair::new(field(cols[2], line_no, "qf1")?, field(cols[3], line_no, "qf2")?),
                image: field(cols[4], line_no, "image")?,
                split: cols[5].trim().parse()?,
            })
        })();
        match parsed {
            Ok(r) => ok.push(r),
            Err(e) => errors.push(e),
        }
    }
    (ok, errors)
}

#[derive(Clone, Debug)]
pub struct DatasetConfig {
    pub pairs: Vec<QfPair>,
    pub scales: Vec<usize>,
    /// Also build the set for the special network.
    pub special: bool,
    pub seed: u64,
    pub train_fraction: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            pairs: QfPair::grid(&DEFAULT_QF_VALUES),
            scales: DEFAULT_SCALES.to_vec(),
            special: true,
            seed: 0,
            train_fraction: 0.8,
        }
    }
}

/// Generated samples, keyed by set name ("64", "128", "256", "special").
#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub images: Vec<ImageRecord>,
    pub sets: BTreeMap<String, Vec<BlockSample>>,
}

impl Dataset {
    pub fn set(&self, name: &str) -> Option<&[BlockSample]> {
        self.sets.get(name).map(Vec::as_slice)
    }

    pub fn manifest(&self, name: &str) -> Manifest {
        let records = self
            .set(name)
            .unwrap_or_default()
            .iter()
            .map(|s| ManifestRecord {
                path: image_name(s.image, s.pair, "images", "jpg"),
                label: s.label,
                qf1: s.pair.qf1,
                qf2: s.pair.qf2,
                scale: s.scale,
                x: s.x,
                y: s.y,
                split: s.split,
            })
            .collect();
        Manifest { records }
    }

    pub fn feature_rows(&self, name: &str) -> FloatRows {
        let mut rows = FloatRows::new(FEATURE_DIM);
        for s in self.set(name).unwrap_or_default() {
            rows.values.extend_from_slice(s.features.values());
        }
        rows
    }
}

pub fn set_name(scale: usize) -> String {
    scale.to_string()
}

pub fn manifest_file(name: &str) -> String {
    format!("manifest_{name}.csv")
}

pub fn features_file(name: &str) -> String {
    format!("features_{name}.djfv")
}

pub const IMAGES_FILE: &str = "images.csv";

fn image_name(image: usize, pair: QfPair, dir: &str, ext: &str) -> String {
    format!("{dir}/img{image:04}_q{}-{}.{ext}", pair.qf1, pair.qf2)
}

/// Seeded image-level 80/20 split; at least one image lands on each side when possible.
pub fn split_images(n: usize, train_fraction: f64, seed: u64) -> Vec<Split> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5B117));
    let mut n_train = (n as f64 * train_fraction).round() as usize;
    if n >= 2 {
        n_train = n_train.clamp(1, n - 1);
    } else {
        n_train = n;
    }
    let mut out = vec![Split::Val; n];
    for &i in &order[..n_train] {
        out[i] = Split::Train;
    }
    out
}

fn job_rng(seed: u64, image: usize, pair: QfPair, salt: u64) -> ChaCha8Rng {
    let mix = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((image as u64) << 20)
        .wrapping_add(u64::from(pair.qf1) << 8)
        .wrapping_add(u64::from(pair.qf2))
        .wrapping_add(salt.wrapping_mul(0xD1B5_4A32_D192_ED03));
    ChaCha8Rng::seed_from_u64(mix)
}

/// Square blocks of side `scale` wholly inside / wholly outside the mask.
fn labeled_blocks(mask: &BinaryMask, scale: usize) -> (Vec<Rect>, Vec<Rect>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for by in 0..mask.height() / scale {
        for bx in 0..mask.width() / scale {
            let r = Rect::square(bx * scale, by * scale, scale);
            let inside = mask.count_in(&r);
            if inside == scale * scale {
                pos.push(r);
            } else if inside == 0 {
                neg.push(r);
            }
        }
    }
    (pos, neg)
}

fn take_balanced(mut pos: Vec<Rect>, mut neg: Vec<Rect>, rng: &mut ChaCha8Rng) -> (Vec<Rect>, Vec<Rect>) {
    let k = pos.len().min(neg.len());
    for v in [&mut pos, &mut neg] {
        if v.len() > k {
            v.shuffle(rng);
            v.truncate(k);
            v.sort_by_key(|r| (r.y, r.x));
        }
    }
    (pos, neg)
}

struct JobOutput {
    record: ImageRecord,
    scale_samples: Vec<Vec<BlockSample>>,
    special_pos: Vec<BlockSample>,
    special_neg_pool: Vec<BlockSample>,
}

/// Tampers every corpus image under every pair and collects balanced block sets.
///
/// When `out_dir` is given, the tampered JPEGs, masks, manifests and feature
/// files are written beneath it.
pub fn build_dataset(corpus: &[RawImage], cfg: &DatasetConfig, out_dir: Option<&Path>) -> Result<Dataset> {
    if corpus.is_empty() {
        return Err(Error::invalid("empty corpus"));
    }
    if cfg.pairs.is_empty() {
        return Err(Error::invalid("empty quality-factor grid"));
    }
    if let Some(bad) = cfg.scales.iter().find(|&&s| s == 0 || s % 8 != 0) {
        return Err(Error::invalid(format!("block scale {bad} is not a positive multiple of 8")));
    }
    if cfg.special && !cfg.pairs.iter().any(|p| p.qf1 > p.qf2) {
        return Err(Error::invalid("special set needs at least one pair with qf1 > qf2"));
    }
    if let Some(dir) = out_dir {
        for sub in ["images", "masks"] {
            let p = dir.join(sub);
            std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
    }
    let splits = split_images(corpus.len(), cfg.train_fraction, cfg.seed);
    let jobs: Vec<(usize, QfPair)> = (0..corpus.len())
        .flat_map(|i| cfg.pairs.iter().map(move |&p| (i, p)))
        .collect();

    let outputs: Vec<JobOutput> = jobs
        .par_iter()
        .map(|&(image, pair)| -> Result<JobOutput> {
            let img = corpus[image].crop_to_blocks()?;
            let spec = TamperSpec::left_half(pair.qf1, pair.qf2, img.width(), img.height());
            let (bytes, mask) = tamper_and_recompress(&img, &spec)?;
            let coeffs = parse_jpeg(&bytes)?;
            let record = ImageRecord {
                jpeg: image_name(image, pair, "images", "jpg"),
                mask: image_name(image, pair, "masks", "pgm"),
                pair,
                image,
                split: splits[image],
            };
            if let Some(dir) = out_dir {
                let jp = dir.join(&record.jpeg);
                std::fs::write(&jp, &bytes).map_err(|e| Error::io(&jp, e))?;
                mask.to_image().write_pgm(&dir.join(&record.mask))?;
            }
            let sample = |r: &Rect, label: Label, scale: usize| -> Result<BlockSample> {
                Ok(BlockSample {
                    features: extract_features(&coeffs, r)?,
                    label,
                    pair,
                    scale,
                    x: r.x,
                    y: r.y,
                    image,
                    split: splits[image],
                })
            };
            let mut scale_samples = Vec::with_capacity(cfg.scales.len());
            for (si, &scale) in cfg.scales.iter().enumerate() {
                let (pos, neg) = labeled_blocks(&mask, scale);
                let (pos, neg) = take_balanced(pos, neg, &mut job_rng(cfg.seed, image, pair, si as u64));
                let mut v = Vec::with_capacity(pos.len() + neg.len());
                for r in &pos {
                    v.push(sample(r, Label::Tampered, scale)?);
                }
                for r in &neg {
                    v.push(sample(r, Label::Authentic, scale)?);
                }
                scale_samples.push(v);
            }
            let (mut special_pos, mut special_neg_pool) = (Vec::new(), Vec::new());
            if cfg.special {
                let (pos, neg) = labeled_blocks(&mask, 64);
                if pair.qf1 > pair.qf2 {
                    for r in &pos {
                        special_pos.push(sample(r, Label::Tampered, 64)?);
                    }
                }
                for r in &neg {
                    special_neg_pool.push(sample(r, Label::Authentic, 64)?);
                }
            }
            Ok(JobOutput {
                record,
                scale_samples,
                special_pos,
                special_neg_pool,
            })
        })
        .collect::<Result<_>>()?;

    let mut ds = Dataset::default();
    for (si, &scale) in cfg.scales.iter().enumerate() {
        let samples = outputs.iter().flat_map(|o| o.scale_samples[si].iter().cloned()).collect();
        ds.sets.insert(set_name(scale), samples);
    }
    if cfg.special {
        ds.sets.insert(SPECIAL_SET.to_string(), special_set(&outputs, cfg.seed));
    }
    ds.images = outputs.into_iter().map(|o| o.record).collect();

    if let Some(dir) = out_dir {
        let p = dir.join(IMAGES_FILE);
        std::fs::write(&p, images_to_csv(&ds.images)).map_err(|e| Error::io(&p, e))?;
        for name in ds.sets.keys() {
            ds.manifest(name).write(&dir.join(manifest_file(name)))?;
            ds.feature_rows(name).write(&dir.join(features_file(name)))?;
        }
    }
    Ok(ds)
}

/// Per image: every qf1 > qf2 tampered block, matched by as many doubly
/// compressed blocks drawn from all of that image's pairs.
fn special_set(outputs: &[JobOutput], seed: u64) -> Vec<BlockSample> {
    let mut by_image: BTreeMap<usize, (Vec<&BlockSample>, Vec<&BlockSample>)> = BTreeMap::new();
    for o in outputs {
        let e = by_image.entry(o.record.image).or_default();
        e.0.extend(o.special_pos.iter());
        e.1.extend(o.special_neg_pool.iter());
    }
    let mut out = Vec::new();
    for (image, (mut pos, mut neg)) in by_image {
        let mut rng = job_rng(seed, image, QfPair::new(0, 0), 99);
        let k = pos.len().min(neg.len());
        pos.shuffle(&mut rng);
        pos.truncate(k);
        neg.shuffle(&mut rng);
        neg.truncate(k);
        let key = |s: &&BlockSample| (s.pair, s.y, s.x);
        pos.sort_by_key(key);
        neg.sort_by_key(key);
        out.extend(pos.into_iter().cloned());
        out.extend(neg.into_iter().cloned());
    }
    out
}

/// Scale-block dataset over `pairs`; writes beneath `out_dir` and returns the
/// manifest of each requested scale.
pub fn make_synthetic_dataset(
    corpus: &[RawImage],
    pairs: &[QfPair],
    scales: &[usize],
    out_dir: Option<&Path>,
    seed: u64,
) -> Result<Dataset> {
    let cfg = DatasetConfig {
        pairs: pairs.to_vec(),
        scales: scales.to_vec(),
        special: false,
        seed,
        ..DatasetConfig::default()
    };
    build_dataset(corpus, &cfg, out_dir)
}

/// Training data for the special network: qf1 > qf2 tampered 64x64 blocks
/// against doubly compressed ones, balanced.
pub fn make_special_dataset(
    corpus: &[RawImage],
    pairs: &[QfPair],
    out_dir: Option<&Path>,
    seed: u64,
) -> Result<Manifest> {
    let cfg = DatasetConfig {
        pairs: pairs.to_vec(),
        scales: Vec::new(),
        special: true,
        seed,
        ..DatasetConfig::default()
    };
    Ok(build_dataset(corpus, &cfg, out_dir)?.manifest(SPECIAL_SET))
}

/// Reads one set written by [`build_dataset`]; if the feature file is missing
/// the features are re-extracted from the JPEGs.
pub fn load_set(manifest_path: &Path) -> Result<(Manifest, FloatRows)> {
    let manifest = Manifest::read(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let stem = manifest_path
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_prefix("manifest_"))
        .and_then(|n| n.strip_suffix(".csv"));
    if let Some(name) = stem {
        let fp = dir.join(features_file(name));
        if fp.exists() {
            let rows = FloatRows::read(&fp)?;
            if rows.count() != manifest.len() || rows.dim != FEATURE_DIM {
                return Err(Error::Format(format!(
                    "{} holds {} rows of {}, manifest has {} records",
                    fp.display(),
                    rows.count(),
                    rows.dim,
                    manifest.len()
                )));
            }
            return Ok((manifest, rows));
        }
    }
    let mut rows = FloatRows::new(FEATURE_DIM);
    let mut cache: BTreeMap<String, crate::jpeg::CoeffImage> = BTreeMap::new();
    for r in &manifest.records {
        if !cache.contains_key(&r.path) {
            let p = dir.join(&r.path);
            let bytes = std::fs::read(&p).map_err(|e| Error::io(&p, e))?;
            cache.insert(r.path.clone(), parse_jpeg(&bytes)?);
        }
        let f = extract_features(&cache[&r.path], &Rect::square(r.x, r.y, r.scale))?;
        rows.push(f.values())?;
    }
    Ok((manifest, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::synthesize_image;

    fn corpus(n: usize) -> Vec<RawImage> {
        (0..n).map(|i| synthesize_image(i as u64, 512, 384)).collect()
    }

    #[test]
    fn block_counts_on_benchmark_size() {
        let ds = make_synthetic_dataset(&corpus(1), &[QfPair::new(50, 90)], &[64, 256], None, 1).unwrap();
        let s64 = ds.set("64").unwrap();
        assert_eq!(s64.len(), 48);
        assert_eq!(s64.iter().filter(|s| s.label == Label::Tampered).count(), 24);
        let s256 = ds.set("256").unwrap();
        assert_eq!(s256.len(), 2);
        assert_eq!(s256.iter().filter(|s| s.label == Label::Tampered).count(), 1);
    }

    #[test]
    fn labels_follow_the_mask() {
        let ds = make_synthetic_dataset(&corpus(1), &[QfPair::new(60, 80)], &[128], None, 2).unwrap();
        for s in ds.set("128").unwrap() {
            let right = s.x + s.scale;
            match s.label {
                Label::Tampered => assert!(right <= 256),
                Label::Authentic => assert!(s.x >= 256),
            }
        }
    }

    #[test]
    fn grid_has_all_pairs() {
        assert_eq!(QfPair::grid(&DEFAULT_QF_VALUES).len(), 100);
        assert_eq!(QfPair::grid(&[50, 90]).len(), 4);
    }

    #[test]
    fn special_set_rules() {
        let pairs = QfPair::grid(&[50, 90]);
        let ds = build_dataset(
            &corpus(2),
            &DatasetConfig {
                pairs: pairs.clone(),
                scales: vec![64],
                special: true,
                seed: 5,
                train_fraction: 0.8,
            },
            None,
        )
        .unwrap();
        let sp = ds.set(SPECIAL_SET).unwrap();
        let pos: Vec<_> = sp.iter().filter(|s| s.label == Label::Tampered).collect();
        let neg = sp.len() - pos.len();
        assert_eq!(pos.len(), neg);
        assert!(!pos.is_empty());
        assert!(pos.iter().all(|s| s.pair == QfPair::new(90, 50)));

        assert!(make_special_dataset(&corpus(1), &[QfPair::new(50, 90)], None, 0).is_err());
    }

    #[test]
    fn balanced_per_image_and_pair() {
        let pairs = [QfPair::new(50, 90), QfPair::new(70, 60)];
        let ds = make_synthetic_dataset(&corpus(3), &pairs, &[64, 128], None, 9).unwrap();
        for name in ["64", "128"] {
            let mut tally: BTreeMap<(usize, QfPair), (usize, usize)> = BTreeMap::new();
            for s in ds.set(name).unwrap() {
                let e = tally.entry((s.image, s.pair)).or_default();
                match s.label {
                    Label::Tampered => e.0 += 1,
                    Label::Authentic => e.1 += 1,
                }
            }
            assert_eq!(tally.len(), 6);
            assert!(tally.values().all(|(p, n)| p == n && *p > 0));
        }
    }

    #[test]
    fn split_is_image_level_and_stable() {
        let s = split_images(40, 0.8, 3);
        assert_eq!(s.iter().filter(|&&x| x == Split::Train).count(), 32);
        assert_eq!(s, split_images(40, 0.8, 3));
        assert_eq!(split_images(1, 0.8, 0), vec![Split::Train]);
        assert_eq!(split_images(2, 0.8, 0).iter().filter(|&&x| x == Split::Val).count(), 1);
    }

    #[test]
    fn manifest_csv_round_trip() {
        let m = Manifest {
            records: vec![ManifestRecord {
                path: "images/img0000_q50-90.jpg".into(),
                label: Label::Tampered,
                qf1: 50,
                qf2: 90,
                scale: 64,
                x: 0,
                y: 64,
                split: Split::Val,
            }],
        };
        let text = m.to_csv();
        assert!(text.starts_with(MANIFEST_HEADER));
        assert_eq!(Manifest::from_csv(&text).unwrap(), m);
        assert!(Manifest::from_csv("a,b\n").is_err());
    }

    #[test]
    fn writes_and_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let corpus: Vec<_> = (0..2).map(|i| synthesize_image(i, 128, 128)).collect();
        let ds = make_synthetic_dataset(&corpus, &[QfPair::new(50, 90)], &[64], Some(dir.path()), 4).unwrap();
        let mp = dir.path().join(manifest_file("64"));
        let (m, rows) = load_set(&mp).unwrap();
        assert_eq!(m, ds.manifest("64"));
        assert_eq!(rows, ds.feature_rows("64"));
        // Without the feature file the features are rebuilt from the JPEGs.
        std::fs::remove_file(dir.path().join(features_file("64"))).unwrap();
        let (_, rebuilt) = load_set(&mp).unwrap();
        assert_eq!(rebuilt, rows);
        let text = std::fs::read_to_string(dir.path().join(IMAGES_FILE)).unwrap();
        let (imgs, errs) = images_from_csv(&text);
        assert!(errs.is_empty());
        assert_eq!(imgs, ds.images);
    }
}
