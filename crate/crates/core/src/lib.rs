//! Structured compression operators for compressive deep learning.
//!
//! A subsampled unitary block-circulant (BCCB) matrix is fitted to a
//! training set by projecting its PCA basis onto the family of unitary
//! BCCB matrices, then used, like a strided convolution, to compress images
//! before a small convolutional classifier. Baselines (downsampling, random
//! convolution, PCA, and a jointly learned filter) share the same
//! [`compressors::CompressorSpec`] interface.
//!
//! ```
//! use compdl::compressors::{make_compressor, Method};
//!
//! let c = make_compressor(Method::Downsample, None, 3, 0).unwrap();
//! assert_eq!(c.output_dims(), (10, 10));
//! assert_eq!(format!("{:.2}", c.compression()), "7.84");
//! ```

pub mod bccb;
pub mod cli;
pub mod compressors;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod nn;
pub mod pca;
pub mod seed;
pub mod subsample;

pub use error::{Error, Result};
