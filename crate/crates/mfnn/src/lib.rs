//! Multi-frequency neural network for series arc-fault diagnosis.
//!
//! A self-contained stack: a dense tensor substrate with manual
//! backpropagation ([`tensor`], [`layers`]), the trainable periodic EAS
//! activation ([`activation`]), the branch/trunk network and its ablation
//! variants ([`model`]), an Adam training loop ([`training`]), discrete
//! Fourier series analysis and a synthetic arc-signal data pipeline
//! ([`signals`]), and the occlusion/decomposition analysis protocols
//! ([`analysis`]).

pub mod activation;
pub mod analysis;
pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod layers;
pub mod model;
pub mod scalar;
pub mod signals;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tensor::Tensor;
