//! Unsupervised ridge-pattern classification, end to end: a small dense-tensor
//! engine with reverse-mode differentiation, convolutional auto-encoder models
//! with latent-space constraints, image preprocessing, three clusterers
//! (k-means, agglomerative, BIRCH), a consensus step with sample rejection,
//! and the evaluation metrics to score the result against labels.
//!
//! The crate is `no_std`-compatible (with `alloc`); everything that touches
//! the filesystem, PNG/CSV/JSON formats, or the command line lives in the
//! companion `patternflow` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod autodiff;
pub mod clustering;
pub mod consensus;
pub mod embed;
pub mod error;
pub mod image;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod num;
pub mod optim;
pub mod rng;
pub mod synth;
pub mod tensor;

mod assignment;
mod conv;

pub use error::{Error, Result};
pub use tensor::{LatentMatrix, Parameter, Tensor};
