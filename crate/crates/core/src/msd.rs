//! Multi-scale fusion with threshold routing to a special network.
//!
//! Three networks score co-centered 64, 128 and 256 pixel regions; their
//! probability pairs are mixed with fixed weights. When the fused verdict is
//! too close to call (`|F0 - F1| < t`) the decision is deferred to a network
//! trained on blocks tampered with a higher first quality than second.

use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureVector, FEATURE_DIM};
use crate::geom::Rect;
use crate::io::FloatRows;
use crate::jpeg::CoeffImage;
use crate::nn::{self, EpochStats, Network, NetworkSpec, Samples, TrainConfig};
use crate::sim::{Label, Manifest, Split};
use crate::Scalar;

pub const SCALES: [usize; 3] = [64, 128, 256];
pub const DEFAULT_WEIGHTS: [f64; 3] = [0.8, 0.1, 0.1];
pub const DEFAULT_THRESHOLD: f64 = 0.2;

const SIMPLEX_TOL: f64 = 1e-6;

/// Convex weights for the 64/128/256 networks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionWeights<S> {
    w: [S; 3],
}

impl<S: Scalar> FusionWeights<S> {
    pub fn new(w: [S; 3]) -> Result<Self> {
        let sum: f64 = w.iter().map(|v| v.to_f64_lossy()).sum();
        if w.iter().any(|v| !(v.to_f64_lossy() >= 0.0 && v.to_f64_lossy() <= 1.0)) || (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::invalid(format!(
                "fusion weights {}, {}, {} must lie in [0, 1] and sum to 1",
                w[0], w[1], w[2]
            )));
        }
        Ok(Self { w })
    }

    pub fn get(&self) -> [S; 3] {
        self.w
    }
}

impl<S: Scalar> Default for FusionWeights<S> {
    fn default() -> Self {
        Self {
            w: DEFAULT_WEIGHTS.map(S::from_f64_lossy),
        }
    }
}

/// Weighted combination of three probability pairs.
pub fn fuse<S: Scalar>(s: [[S; 2]; 3], weights: &FusionWeights<S>) -> Result<[S; 2]> {
    for p in &s {
        if ((p[0] + p[1]).to_f64_lossy() - 1.0).abs() > SIMPLEX_TOL || p[0] < S::zero() || p[1] < S::zero() {
            return Err(Error::invalid(format!("({}, {}) is not a probability pair", p[0], p[1])));
        }
    }
    let w = weights.w;
    let mut out = [S::zero(); 2];
    for k in 0..2 {
        out[k] = w[0] * s[0][k] + w[1] * s[1][k] + w[2] * s[2][k];
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    Fused,
    Special,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict<S> {
    pub label: Label,
    /// Probability pair the label was taken from: the special network's output
    /// on the special route, the fused pair otherwise. Index 0 is tampered.
    pub probs: [S; 2],
    pub fused: [S; 2],
    pub route: Route,
}

impl<S: Scalar> Verdict<S> {
    pub fn tampered_probability(&self) -> S {
        self.probs[0]
    }
}

/// Strict comparison: ties go to authentic.
fn label_of<S: Scalar>(p: [S; 2]) -> Label {
    if p[0] > p[1] {
        Label::Tampered
    } else {
        Label::Authentic
    }
}

/// Whether a fused pair is ambiguous enough to defer to the special network.
pub fn routes_to_special<S: Scalar>(fused: [S; 2], threshold: S) -> bool {
    (fused[0] - fused[1]).abs() < threshold
}

/// The composite detector.
#[derive(Clone, Debug, PartialEq)]
pub struct MsdModel<S> {
    pub net64: Network<S>,
    pub net128: Network<S>,
    pub net256: Network<S>,
    pub special: Network<S>,
    weights: FusionWeights<S>,
    threshold: S,
}

/// Batch size for inference passes.
const INFER_BATCH: usize = 128;

impl<S: Scalar> MsdModel<S> {
    pub fn new(
        nets: [Network<S>; 4],
        weights: FusionWeights<S>,
        threshold: S,
    ) -> Result<Self> {
        let t = threshold.to_f64_lossy();
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::invalid(format!("threshold must be in (0, 1], got {t}")));
        }
        for n in &nets {
            if n.input_dim() != FEATURE_DIM {
                return Err(Error::invalid(format!(
                    "network takes {} inputs, features have {FEATURE_DIM}",
                    n.input_dim()
                )));
            }
        }
        let [net64, net128, net256, special] = nets;
        Ok(Self {
            net64,
            net128,
            net256,
            special,
            weights,
            threshold,
        })
    }

    pub fn weights(&self) -> &FusionWeights<S> {
        &self.weights
    }

    pub fn threshold(&self) -> S {
        self.threshold
    }

    pub fn set_threshold(&mut self, t: S) -> Result<()> {
        let v = t.to_f64_lossy();
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::invalid(format!("threshold must be in (0, 1], got {v}")));
        }
        self.threshold = t;
        Ok(())
    }

    pub fn set_weights(&mut self, w: FusionWeights<S>) {
        self.weights = w;
    }

    pub fn networks(&self) -> [&Network<S>; 4] {
        [&self.net64, &self.net128, &self.net256, &self.special]
    }

    pub fn classify_block(&self, h64: &FeatureVector, h128: &FeatureVector, h256: &FeatureVector) -> Result<Verdict<S>> {
        let conv = |h: &FeatureVector| -> Vec<S> { h.values().iter().map(|&v| S::from_f64_lossy(v as f64)).collect() };
        Ok(self.classify_rows(&conv(h64), &conv(h128), &conv(h256), 1, true)?[0])
    }

    /// Classifies `n` blocks given flat feature rows per scale. With
    /// `use_special` false every block takes the fused route.
    pub fn classify_rows(&self, x64: &[S], x128: &[S], x256: &[S], n: usize, use_special: bool) -> Result<Vec<Verdict<S>>> {
        let dim = FEATURE_DIM;
        if [x64.len(), x128.len(), x256.len()].iter().any(|&l| l != n * dim) {
            return Err(Error::invalid("feature rows do not match block count"));
        }
        let mut out = Vec::with_capacity(n);
        for start in (0..n).step_by(INFER_BATCH) {
            let m = INFER_BATCH.min(n - start);
            let r = start * dim..(start + m) * dim;
            let p64 = self.net64.predict_batch(&x64[r.clone()], m)?;
            let p128 = self.net128.predict_batch(&x128[r.clone()], m)?;
            let p256 = self.net256.predict_batch(&x256[r], m)?;
            let mut routed = Vec::new();
            for i in 0..m {
                let fused = fuse([p64[i], p128[i], p256[i]], &self.weights)?;
                let special = use_special && routes_to_special(fused, self.threshold);
                if special {
                    routed.push(out.len());
                }
                out.push(Verdict {
                    label: label_of(fused),
                    probs: fused,
                    fused,
                    route: if special { Route::Special } else { Route::Fused },
                });
            }
            if !routed.is_empty() {
                let mut xs = Vec::with_capacity(routed.len() * dim);
                for &i in &routed {
                    xs.extend_from_slice(&x64[i * dim..(i + 1) * dim]);
                }
                let c = self.special.predict_batch(&xs, routed.len())?;
                for (&i, p) in routed.iter().zip(c) {
                    out[i].probs = p;
                    out[i].label = label_of(p);
                }
            }
        }
        Ok(out)
    }
}

/// The `side`-pixel square co-centered with `window`, shifted inward to stay
/// inside the image and snapped to the block grid. When the image is smaller
/// than `side` in a dimension the region spans the whole usable extent there.
pub fn context_rect(width: usize, height: usize, window: &Rect, side: usize) -> Rect {
    let axis = |start: usize, len: usize, extent: usize| -> (usize, usize) {
        let usable = extent / 8 * 8;
        let size = side.min(usable);
        let centre = 2 * start + len;
        let ideal = centre.saturating_sub(size) / 2;
        let max_start = usable - size;
        (ideal.min(max_start) / 8 * 8, size)
    };
    let (x, w) = axis(window.x, window.width, width);
    let (y, h) = axis(window.y, window.height, height);
    Rect::new(x, y, w, h)
}

/// Features for the three scale networks around a 64x64 window.
pub fn window_features(c: &CoeffImage, window: &Rect) -> Result<[FeatureVector; 3]> {
    let (w, h) = (c.width() as usize, c.height() as usize);
    if w < 64 || h < 64 {
        return Err(Error::invalid(format!("image {w}x{h} is smaller than 64x64")));
    }
    if window.width != 64 || window.height != 64 || !window.is_block_aligned() || !window.fits_in(w, h) {
        return Err(Error::invalid(format!("window {window:?} is not a block-aligned in-bounds 64x64 square")));
    }
    Ok([
        extract_features(c, window)?,
        extract_features(c, &context_rect(w, h, window, 128))?,
        extract_features(c, &context_rect(w, h, window, 256))?,
    ])
}

/// Labelled feature rows, split into train and validation parts.
#[derive(Clone, Debug)]
pub struct SplitSamples<S> {
    pub train: Samples<S>,
    pub val: Option<Samples<S>>,
}

impl<S: Scalar> SplitSamples<S> {
    /// Pairs manifest records with their feature rows.
    pub fn from_manifest(manifest: &Manifest, rows: &FloatRows) -> Result<Self> {
        if manifest.len() != rows.count() || rows.dim != FEATURE_DIM {
            return Err(Error::invalid(format!(
                "{} manifest records against {} feature rows of {}",
                manifest.len(),
                rows.count(),
                rows.dim
            )));
        }
        let mut parts = [(Vec::new(), Vec::new()), (Vec::new(), Vec::new())];
        for (i, r) in manifest.records.iter().enumerate() {
            let part = &mut parts[usize::from(r.split == Split::Val)];
            part.0.extend(rows.row(i).iter().map(|&v| S::from_f64_lossy(v as f64)));
            part.1.push(r.label.class_index());
        }
        let [(tx, ty), (vx, vy)] = parts;
        Ok(Self {
            train: Samples::new(FEATURE_DIM, tx, ty)?,
            val: if vy.is_empty() { None } else { Some(Samples::new(FEATURE_DIM, vx, vy)?) },
        })
    }
}

#[derive(Clone, Debug)]
pub struct MsdConfig {
    pub train: TrainConfig,
    pub spec: NetworkSpec,
    pub weights: [f64; 3],
    pub threshold: f64,
}

impl Default for MsdConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            spec: NetworkSpec::default(),
            weights: DEFAULT_WEIGHTS,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

pub const NETWORK_NAMES: [&str; 4] = ["64", "128", "256", "special"];

/// Trains the four networks one after another, each from its own seed derived
/// from the configured one. `on_epoch` receives the network name with each
/// epoch's statistics.
pub fn train_msd<S: Scalar>(
    sets: [&SplitSamples<S>; 4],
    cfg: &MsdConfig,
    mut on_epoch: impl FnMut(&str, &EpochStats),
) -> Result<(MsdModel<S>, Vec<Vec<EpochStats>>)> {
    cfg.train.validate()?;
    let weights = FusionWeights::new(cfg.weights.map(S::from_f64_lossy))?;
    for (name, set) in NETWORK_NAMES.iter().zip(&sets) {
        if set.train.is_empty() {
            return Err(Error::invalid(format!("training set for network {name} is empty")));
        }
    }
    let mut nets = Vec::with_capacity(4);
    let mut history = Vec::with_capacity(4);
    for (k, (name, set)) in NETWORK_NAMES.iter().zip(sets).enumerate() {
        let seed = cfg.train.seed.wrapping_mul(4).wrapping_add(k as u64);
        let mut net = Network::new(cfg.spec, seed)?;
        let tc = TrainConfig { seed, ..cfg.train };
        let h = nn::train(&mut net, &set.train, set.val.as_ref(), &tc, |s| on_epoch(name, s))?;
        nets.push(net);
        history.push(h);
    }
    let nets: [Network<S>; 4] = nets.try_into().map_err(|_| Error::State("network count".into()))?;
    Ok((MsdModel::new(nets, weights, S::from_f64_lossy(cfg.threshold))?, history))
}

pub const COMPOSITE_MAGIC: &[u8; 4] = b"MSDC";
pub const COMPOSITE_VERSION: u32 = 1;

pub fn to_bytes<S: Scalar>(m: &MsdModel<S>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(COMPOSITE_MAGIC);
    out.extend_from_slice(&COMPOSITE_VERSION.to_le_bytes());
    for v in m.weights.w.iter().chain([&m.threshold]) {
        out.extend_from_slice(&v.to_f32_lossy().to_le_bytes());
    }
    for net in m.networks() {
        let payload = nn::model_io::to_bytes(net);
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
    }
    out
}

pub fn from_bytes<S: Scalar>(bytes: &[u8]) -> Result<MsdModel<S>> {
    let trunc = || Error::Format("composite model truncated".into());
    if bytes.len() < 8 {
        return Err(trunc());
    }
    if &bytes[..4] != COMPOSITE_MAGIC {
        return Err(Error::Format("not a composite model (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != COMPOSITE_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let mut pos = 8;
    let mut header = [S::zero(); 4];
    for h in &mut header {
        let b = bytes.get(pos..pos + 4).ok_or_else(trunc)?;
        *h = S::from_f64_lossy(f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64);
        pos += 4;
    }
    let mut nets = Vec::with_capacity(4);
    for _ in 0..4 {
        let b = bytes.get(pos..pos + 8).ok_or_else(trunc)?;
        let len = u64::from_le_bytes(b.try_into().expect("8 bytes")) as usize;
        pos += 8;
        let end = pos.checked_add(len).ok_or_else(trunc)?;
        nets.push(nn::model_io::from_bytes(bytes.get(pos..end).ok_or_else(trunc)?)?);
        pos = end;
    }
    if pos != bytes.len() {
        return Err(Error::Format("trailing bytes after composite model".into()));
    }
    let nets: [Network<S>; 4] = nets.try_into().map_err(|_| trunc())?;
    let weights = FusionWeights::new([header[0], header[1], header[2]])?;
    MsdModel::new(nets, weights, header[3])
}

pub fn save_msd<S: Scalar>(m: &MsdModel<S>, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(m)).map_err(|e| Error::io(path, e))
}

pub fn load_msd<S: Scalar>(path: &Path) -> Result<MsdModel<S>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}
