//! Tampering model and dataset construction from lossless images.

pub mod corpus;
pub mod dataset;
pub mod dct;
mod image;
mod tamper;

pub use corpus::{synthesize_corpus, synthesize_image};
pub use dataset::{
    build_dataset, make_special_dataset, make_synthetic_dataset, BlockSample, Dataset, DatasetConfig, ImageRecord,
    Label, Manifest, ManifestRecord, QfPair, Split, SPECIAL_SET,
};
pub use dct::{fdct8x8, idct8x8, quantize};
pub use image::RawImage;
pub use tamper::{compress_once, double_quantize_scalar, tamper_and_recompress, tamper_coefficients, TamperSpec};
