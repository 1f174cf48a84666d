use crate::error::{Error, Result};
use crate::Scalar;

/// Activation of one sample: `len` positions by `channels`, position-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S> {
    len: usize,
    channels: usize,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn new(len: usize, channels: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != len * channels {
            return Err(Error::invalid(format!(
                "tensor {len}x{channels} given {} values",
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self { len, channels, data })
    }

    pub fn zeros(len: usize, channels: usize) -> Self {
        Self {
            len,
            channels,
            data: vec![S::zero(); len * channels],
        }
    }

    /// Single-channel tensor.
    pub fn from_vec(data: Vec<S>) -> Result<Self> {
        let len = data.len();
        Self::new(len, 1, data)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.len, self.channels)
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    #[inline]
    pub fn at(&self, pos: usize, channel: usize) -> S {
        self.data[pos * self.channels + channel]
    }
}

pub(crate) fn check_finite<S: Scalar>(data: &[S]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Numeric(format!("non-finite value {} at index {i}", data[i]))),
        None => Ok(()),
    }
}
