//! A small 1D CNN engine: valid convolutions, max pooling, dense layers,
//! softmax cross-entropy and SGD with momentum.

pub mod gradcheck;
mod kernels;
pub mod layers;
pub mod loss;
pub mod model_io;
pub mod network;
pub mod sgd;
mod tensor;
pub mod train;

pub use gradcheck::{grad_check, grad_check_with, Fault, GradCheckReport};
pub use layers::{relu, relu_backward, Conv1d, Dense, MaxPool1d};
pub use loss::{softmax, softmax_xent};
pub use model_io::{load_model, save_model};
pub use network::{BatchResult, Gradients, Layer, Network, NetworkSpec};
pub use sgd::sgd_step;
pub use tensor::Tensor;
pub use train::{evaluate, train, EpochStats, Evaluation, Samples, TrainConfig};
