//! Attribution-based feature spaces for voxelwise brain encoding.
//!
//! The crate is organised bottom-up:
//!
//! - [`tinylm`]: a small decoder-only transformer in `f64` with exact
//!   reverse-mode gradients with respect to its inputs and every layer.
//! - [`attribution`]: gradient norm, gradient × input, integrated gradients,
//!   erasure and layer conductance, plus token → word aggregation.
//! - [`featurespace`]: sliding-window construction of word-aligned feature
//!   matrices (attribution, conductance, attention, activation).
//! - [`encoder`]: TR resampling, FIR delays, standardisation/PCA and
//!   cross-validated ridge regression scored by Pearson correlation.
//! - [`stats`]: Wilcoxon signed-rank, Friedman, Benjamini–Hochberg,
//!   ISC noise ceilings and the layer-preference analyses.
//! - [`dataio`]: file codecs and the synthetic BOLD generator.

pub mod attribution;
pub mod dataio;
pub mod encoder;
pub mod error;
pub mod featurespace;
pub mod linalg;
pub mod stats;
pub mod tinylm;

pub use error::{Error, Result};
