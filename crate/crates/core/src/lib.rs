//! Texture segmentation from patch autocovariance features.
//!
//! The crate covers the whole pipeline: synthetic Gaussian textures
//! ([`synth`]), mosaics with ground truth ([`mosaic`]), per-pixel
//! autocovariance features ([`features`]), k-means / single-linkage /
//! Ward clustering ([`clustering`]), and permutation-matched accuracy plus
//! Monte-Carlo consistency experiments ([`evaluation`]).

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod grid;
pub mod io;
mod linalg;
pub mod mosaic;
pub mod pipeline;
pub mod reproduce;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{Field, LabelMap};
pub use seed::Seed;
