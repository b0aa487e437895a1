//! The nine-layer character ConvNet: six temporal convolutions (with ReLU and
//! optional max-pooling) followed by three fully-connected layers, the first
//! two with ReLU and dropout.

mod checkpoint;
mod config;
mod network;

pub use checkpoint::{Checkpoint, TrainingState, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{output_length_after_conv, Arch, ConvLayerSpec, ModelConfig};
pub use network::{ConvParams, Forward, Model, ModelInput, Params};

#[cfg(test)]
pub(crate) use network::tests as network_tests;
