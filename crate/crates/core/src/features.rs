//! AC-coefficient histogram features.
//!
//! For zigzag positions 2..=10 and bin values -15..=15 the feature counts how
//! many DCT blocks of a region hold exactly that value at that position,
//! giving 9 x 31 = 279 entries. Values outside the bin range are dropped.

use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::jpeg::{CoeffImage, ZIGZAG_TO_NATURAL};

pub const FIRST_POSITION: usize = 2;
pub const LAST_POSITION: usize = 10;
pub const DEFAULT_RADIUS: usize = 15;
/// Length of the default feature vector.
pub const FEATURE_DIM: usize = 279;

/// Which coefficients to histogram and how wide the bins reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureSpec {
    pub first_position: usize,
    pub last_position: usize,
    /// Bins cover `-radius..=radius`.
    pub radius: usize,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            first_position: FIRST_POSITION,
            last_position: LAST_POSITION,
            radius: DEFAULT_RADIUS,
        }
    }
}

impl FeatureSpec {
    /// Spec with a different bin radius (5, 10, 15, 20 give 11/21/31/41 bins).
    pub fn with_radius(radius: usize) -> Self {
        Self {
            radius,
            ..Self::default()
        }
    }

    pub fn positions(&self) -> usize {
        self.last_position + 1 - self.first_position
    }

    pub fn bins(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn dim(&self) -> usize {
        self.positions() * self.bins()
    }

    fn validate(&self) -> Result<()> {
        if self.first_position < 2 || self.last_position > 64 || self.first_position > self.last_position {
            return Err(Error::invalid(format!(
                "zigzag positions {}..={} must be AC positions within 2..=64",
                self.first_position, self.last_position
            )));
        }
        Ok(())
    }
}

/// Histogram feature, position-major: `values[(i - first) * bins + (x + radius)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    values: Vec<f32>,
    spec: FeatureSpec,
}

impl FeatureVector {
    pub fn from_values(values: Vec<f32>, spec: FeatureSpec) -> Result<Self> {
        if values.len() != spec.dim() {
            return Err(Error::invalid(format!(
                "feature length {} does not match dimension {}",
                values.len(),
                spec.dim()
            )));
        }
        Ok(Self { values, spec })
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn spec(&self) -> FeatureSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `H_i(x)` for zigzag position `i` and bin value `x`.
    pub fn get(&self, position: usize, value: i32) -> f32 {
        let row = position - self.spec.first_position;
        let col = (value + self.spec.radius as i32) as usize;
        self.values[row * self.spec.bins() + col]
    }

    /// The histogram row of one zigzag position.
    pub fn histogram(&self, position: usize) -> &[f32] {
        let bins = self.spec.bins();
        let row = position - self.spec.first_position;
        &self.values[row * bins..(row + 1) * bins]
    }
}

/// 279-dimensional histogram feature of a block-aligned region.
pub fn extract_features(c: &CoeffImage, region: &Rect) -> Result<FeatureVector> {
    extract_features_with(c, region, FeatureSpec::default())
}

pub fn extract_features_with(c: &CoeffImage, region: &Rect, spec: FeatureSpec) -> Result<FeatureVector> {
    spec.validate()?;
    if region.is_empty() || !region.is_block_aligned() {
        return Err(Error::invalid(format!("region {region:?} is not a non-empty 8-pixel aligned rectangle")));
    }
    let (bw, bh) = (c.blocks_wide() * 8, c.blocks_high() * 8);
    if !region.fits_in(bw, bh) {
        return Err(Error::invalid(format!(
            "region {region:?} outside the {}x{} coefficient grid",
            bw, bh
        )));
    }
    let bins = spec.bins();
    let radius = spec.radius as i32;
    let naturals: Vec<usize> = (spec.first_position..=spec.last_position)
        .map(|k| ZIGZAG_TO_NATURAL[k - 1])
        .collect();
    let mut counts = vec![0u32; spec.dim()];
    for br in region.y / 8..region.bottom() / 8 {
        for bc in region.x / 8..region.right() / 8 {
            let block = c.block(br, bc);
            for (row, &n) in naturals.iter().enumerate() {
                let v = i32::from(block.coeffs[n]);
                if (-radius..=radius).contains(&v) {
                    counts[row * bins + (v + radius) as usize] += 1;
                }
            }
        }
    }
    let values = counts.into_iter().map(|n| n as f32).collect();
    Ok(FeatureVector { values, spec })
}

/// Divides every count by `n_blocks`.
pub fn features_normalized(v: &FeatureVector, n_blocks: usize) -> Result<FeatureVector> {
    if n_blocks == 0 {
        return Err(Error::invalid("normalization by zero blocks"));
    }
    let n = n_blocks as f32;
    Ok(FeatureVector {
        values: v.values.iter().map(|x| x / n).collect(),
        spec: v.spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jpeg::{zigzag_order, QuantTable};

    fn image(bw: usize, bh: usize) -> CoeffImage {
        CoeffImage::zeros((bw * 8) as u32, (bh * 8) as u32, QuantTable::unit()).unwrap()
    }

    #[test]
    fn all_zero_region() {
        let c = image(8, 8);
        let f = extract_features(&c, &Rect::square(0, 0, 64)).unwrap();
        assert_eq!(f.len(), FEATURE_DIM);
        for i in 2..=10 {
            assert_eq!(f.get(i, 0), 64.0);
            assert_eq!(f.histogram(i).iter().sum::<f32>(), 64.0);
        }
    }

    #[test]
    fn out_of_range_values_are_dropped() {
        let mut c = image(1, 1);
        let (r, col) = zigzag_order(2).unwrap();
        c.block_mut(0, 0).coeffs[r * 8 + col] = 20;
        let f = extract_features(&c, &Rect::square(0, 0, 8)).unwrap();
        assert!(f.histogram(2).iter().all(|&h| h == 0.0));
        for i in 3..=10 {
            assert_eq!(f.get(i, 0), 1.0);
        }
        // Edge bins are not used as overflow buckets.
        assert_eq!(f.get(2, 15), 0.0);
    }

    #[test]
    fn dc_is_ignored() {
        let mut c = image(1, 1);
        c.block_mut(0, 0).coeffs[0] = 5;
        let f = extract_features(&c, &Rect::square(0, 0, 8)).unwrap();
        assert_eq!(f.get(2, 0), 1.0);
        assert_eq!(f.values().iter().sum::<f32>(), 9.0);
    }

    #[test]
    fn bin_radius_study() {
        let c = image(2, 2);
        for (radius, dim) in [(5, 99), (10, 189), (15, 279), (20, 369)] {
            let f = extract_features_with(&c, &Rect::square(0, 0, 16), FeatureSpec::with_radius(radius)).unwrap();
            assert_eq!(f.len(), dim);
            assert_eq!(f.spec().bins(), 2 * radius + 1);
        }
    }

    #[test]
    fn rejects_bad_regions() {
        let c = image(4, 4);
        assert!(extract_features(&c, &Rect::square(4, 0, 8)).is_err());
        assert!(extract_features(&c, &Rect::new(0, 0, 12, 8)).is_err());
        assert!(extract_features(&c, &Rect::square(8, 8, 32)).is_err());
        assert!(extract_features(&c, &Rect::square(0, 0, 0)).is_err());
    }

    #[test]
    fn normalization() {
        let c = image(8, 8);
        let f = extract_features(&c, &Rect::square(0, 0, 64)).unwrap();
        assert_eq!(features_normalized(&f, 1).unwrap(), f);
        let n = features_normalized(&f, 64).unwrap();
        assert_eq!(n.get(5, 0), 1.0);
        for i in 2..=10 {
            assert!(n.histogram(i).iter().sum::<f32>() <= 1.0);
        }
        assert!(features_normalized(&f, 0).is_err());
    }

    #[test]
    fn block_order_does_not_matter() {
        let mut c = image(2, 1);
        c.block_mut(0, 0).coeffs[1] = 3;
        c.block_mut(0, 1).coeffs[8] = -2;
        let mut swapped = c.clone();
        let (a, b) = (*c.block(0, 0), *c.block(0, 1));
        *swapped.block_mut(0, 0) = b;
        *swapped.block_mut(0, 1) = a;
        let region = Rect::new(0, 0, 16, 8);
        assert_eq!(
            extract_features(&c, &region).unwrap(),
            extract_features(&swapped, &region).unwrap()
        );
    }
}
