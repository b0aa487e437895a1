//! Character-level temporal convolutional networks for text classification.
//!
//! The crate is organised around the pipeline a sample goes through:
//!
//! - [`datakit`] loads labeled CSV corpora, joins text fields and draws
//!   per-class train/test splits.
//! - [`augmentation`] optionally rewrites text with ranked thesaurus synonyms.
//! - [`quantizer`] turns text into a backward-ordered 1-of-m character encoding.
//! - [`model`] runs the six convolutional and three fully-connected layers,
//!   built from the hand-written kernels in [`tensor_ops`].
//! - [`trainer`] drives minibatch SGD with momentum and a step-halving schedule.
//! - [`baselines`] provides bag-of-words and bag-of-centroids logistic regression.
//! - [`metrics`] keeps accuracy and confusion matrices.
//!
//! All numeric kernels are generic over [`Real`], so the same code paths run in
//! `f32` for training and in `f64` for gradient checks.

pub mod augmentation;
pub mod baselines;
pub mod config;
pub mod datakit;
mod error;
pub mod metrics;
pub mod model;
pub mod quantizer;
mod real;
pub mod tensor_ops;
pub mod text;
pub mod trainer;
pub mod viz;

pub use error::{Error, Result};
pub use real::{Real, Strided};

/// The generator used wherever a seeded random stream is needed.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Creates the crate's standard seeded generator.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
