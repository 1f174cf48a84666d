//! Detection and localization of double JPEG compression tampering.
//!
//! The pipeline reads quantized DCT coefficients straight from the JPEG
//! bitstream ([`jpeg`]), turns each block region into AC-coefficient histograms
//! ([`features`]), classifies 64x64 regions with three scale networks plus a
//! routing-selected special network ([`msd`]), and assembles per-pixel tamper
//! probability maps ([`localize`]). [`sim`] reproduces the tampering and dataset
//! protocol from lossless images.
//!
//! The numeric core is generic over [`Scalar`]; the aliases below pin the
//! precisions the pipeline actually uses.

pub mod error;
pub mod features;
pub mod geom;
pub mod io;
pub mod jpeg;
pub mod localize;
pub mod msd;
pub mod nn;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Network in the precision used for training and inference.
pub type Network = nn::Network<f32>;
/// Double-precision network, used for gradient verification.
pub type Network64 = nn::Network<f64>;
/// Composite detector in training precision.
pub type MsdModel = msd::MsdModel<f32>;
pub type Tensor = nn::Tensor<f32>;
