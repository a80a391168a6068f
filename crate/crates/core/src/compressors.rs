//! Preprocessing methods mapping an `m × n` image to a smaller 2D array at a
//! given stride.
//!
//! | method        | operator                                                  |
//! |---------------|-----------------------------------------------------------|
//! | `downsample`  | keep pixels `(a·k, b·k)`                                  |
//! | `random-conv` | 5×5 Gaussian filter, correlation, sampled every `k` pixels|
//! | `pca`         | leading principal-component coefficients                  |
//! | `circulant`   | rows of the nearest subsampled unitary BCCB to PCA        |
//! | `pnn`         | filter learned jointly with a classifier, then detached   |

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{CompressedDataset, LabeledDataset};
use crate::error::{Error, Result};
use crate::nn::{self, TrainConfig, Trainer};
use crate::pca::{fit_pca, PcaProjection};
use crate::seed::{derive_seed, tag};
use crate::subsample::{grid_sampler, projection_from_pca, SubsampledProjection};

pub const FILTER_SIZE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Downsample,
    RandomConv,
    Pca,
    Circulant,
    Pnn,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Downsample,
        Method::RandomConv,
        Method::Pca,
        Method::Circulant,
        Method::Pnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Downsample => "downsample",
            Method::RandomConv => "random-conv",
            Method::Pca => "pca",
            Method::Circulant => "circulant",
            Method::Pnn => "pnn",
        }
    }

    pub fn needs_training_set(self) -> bool {
        matches!(self, Method::Pca | Method::Circulant | Method::Pnn)
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown method '{s}' (expected one of downsample, random-conv, pca, circulant, pnn)"
                ))
            })
    }
}

/// Square correlation kernel of odd size.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    values: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, values: Vec<f64>) -> Result<Self> {
        if size % 2 == 0 || values.len() != size * size {
            return Err(Error::dims("kernel", format!("odd {size}x{size}"), values.len()));
        }
        crate::linalg::ensure_finite(&values, "kernel")?;
        Ok(Self { size, values })
    }

    /// Kernel with a single one at the center.
    pub fn delta(size: usize) -> Self {
        let mut values = vec![0.0; size * size];
        values[size * size / 2] = 1.0;
        Self { size, values }
    }

    /// I.i.d. standard normal entries from a seeded generator.
    pub fn random(size: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..size * size)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Self { size, values }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Output shape `(⌈m/k⌉, ⌈n/k⌉)` shared by every method.
pub fn output_dims(m: usize, n: usize, stride: usize) -> (usize, usize) {
    (m.div_ceil(stride), n.div_ceil(stride))
}

fn check_stride(m: usize, n: usize, stride: usize) -> Result<()> {
    if stride == 0 || stride > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "stride {stride} outside 1..={}",
            m.min(n)
        )));
    }
    Ok(())
}

pub fn downsample(image: &[f64], m: usize, n: usize, stride: usize) -> Result<Vec<f64>> {
    check_stride(m, n, stride)?;
    if image.len() != m * n {
        return Err(Error::dims("downsample", m * n, image.len()));
    }
    let (gm, gn) = output_dims(m, n, stride);
    Ok((0..gm)
        .flat_map(|a| (0..gn).map(move |b| image[a * stride * n + b * stride]))
        .collect())
}

/// Zero-padded correlation with `kernel` centred on pixels `(a·k, b·k)`.
pub fn strided_correlation(
    image: &[f64],
    m: usize,
    n: usize,
    kernel: &Kernel,
    stride: usize,
) -> Result<Vec<f64>> {
    check_stride(m, n, stride)?;
    if image.len() != m * n {
        return Err(Error::dims("strided_correlation", m * n, image.len()));
    }
    let (gm, gn) = output_dims(m, n, stride);
    let half = (kernel.size / 2) as isize;
    let mut out = Vec::with_capacity(gm * gn);
    for a in 0..gm {
        for b in 0..gn {
            let (cy, cx) = ((a * stride) as isize, (b * stride) as isize);
            let mut acc = 0.0;
            for u in -half..=half {
                let y = cy + u;
                if y < 0 || y >= m as isize {
                    continue;
                }
                for v in -half..=half {
                    let x = cx + v;
                    if x < 0 || x >= n as isize {
                        continue;
                    }
                    let w = kernel.values[((u + half) as usize) * kernel.size + (v + half) as usize];
                    acc += w * image[y as usize * n + x as usize];
                }
            }
            out.push(acc);
        }
    }
    Ok(out)
}

/// Seed actually used to draw the random filter of a compressor.
pub fn random_filter_seed(seed: u64) -> u64 {
    derive_seed(seed, &[tag("random-conv")])
}

pub fn random_conv(image: &[f64], m: usize, n: usize, stride: usize, seed: u64) -> Result<Vec<f64>> {
    strided_correlation(
        image,
        m,
        n,
        &Kernel::random(FILTER_SIZE, random_filter_seed(seed)),
        stride,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompressorState {
    None,
    Filter(Kernel),
    Pca(PcaProjection),
    Circulant(SubsampledProjection),
}

/// A fitted compressor. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressorSpec {
    pub method: Method,
    pub stride: usize,
    pub seed: u64,
    pub image_dims: (usize, usize),
    pub state: CompressorState,
}

/// Extra knobs for [`make_compressor_with`].
#[derive(Debug, Clone)]
pub struct CompressorOptions {
    /// Image shape when no training set is given.
    pub image_dims: (usize, usize),
    /// Training recipe for the joint network of the `pnn` method.
    pub pnn_training: TrainConfig,
    /// A previously fitted PCA basis with at least `s` components, reused
    /// by the `pca` and `circulant` methods instead of refitting.
    pub pca_basis: Option<PcaProjection>,
}

impl Default for CompressorOptions {
    fn default() -> Self {
        Self {
            image_dims: (28, 28),
            pnn_training: TrainConfig::default(),
            pca_basis: None,
        }
    }
}

pub fn make_compressor(
    method: Method,
    training: Option<&LabeledDataset>,
    stride: usize,
    seed: u64,
) -> Result<CompressorSpec> {
    make_compressor_with(method, training, stride, seed, &CompressorOptions::default())
}

pub fn make_compressor_with(
    method: Method,
    training: Option<&LabeledDataset>,
    stride: usize,
    seed: u64,
    options: &CompressorOptions,
) -> Result<CompressorSpec> {
    let (m, n) = training
        .map(|t| (t.images.rows(), t.images.cols()))
        .unwrap_or(options.image_dims);
    check_stride(m, n, stride)?;
    let (gm, gn) = output_dims(m, n, stride);
    let s = gm * gn;
    let require_training = || {
        training.ok_or_else(|| {
            Error::InvalidArgument(format!("method {method} requires a training set"))
        })
    };
    let pca = |count: usize| -> Result<PcaProjection> {
        match &options.pca_basis {
            Some(basis) if basis.image_dims() == (m, n) && basis.s() >= count => {
                basis.truncate(count)
            }
            _ => fit_pca(&require_training()?.images, count),
        }
    };

    let state = match method {
        Method::Downsample => CompressorState::None,
        Method::RandomConv => {
            CompressorState::Filter(Kernel::random(FILTER_SIZE, random_filter_seed(seed)))
        }
        Method::Pca => CompressorState::Pca(pca(s)?),
        Method::Circulant => {
            let sampler = grid_sampler(m, n, stride)?;
            CompressorState::Circulant(projection_from_pca(&pca(s)?, &sampler)?)
        }
        Method::Pnn => {
            let data = require_training()?;
            let base = nn::build_architecture(gm, gn)?;
            let joint = nn::pnn_wrap(&base, stride, m, n)?;
            let config = TrainConfig {
                seed: derive_seed(seed, &[tag("pnn")]),
                ..options.pnn_training
            };
            let mut trainer = Trainer::new(&joint, config)?;
            trainer.run(&CompressedDataset::from_labeled(data))?;
            CompressorState::Filter(nn::extract_pnn_filter(&trainer.network)?)
        }
    };
    Ok(CompressorSpec {
        method,
        stride,
        seed,
        image_dims: (m, n),
        state,
    })
}

impl CompressorSpec {
    pub fn output_dims(&self) -> (usize, usize) {
        output_dims(self.image_dims.0, self.image_dims.1, self.stride)
    }

    /// Raw pixel count over compressed value count.
    pub fn compression(&self) -> f64 {
        let (gm, gn) = self.output_dims();
        (self.image_dims.0 * self.image_dims.1) as f64 / (gm * gn) as f64
    }

    pub fn filter(&self) -> Option<&Kernel> {
        match &self.state {
            CompressorState::Filter(k) => Some(k),
            _ => None,
        }
    }

    /// Compressed image in row-major `output_dims()` order.
    pub fn apply(&self, image: &[f64]) -> Result<Vec<f64>> {
        let (m, n) = self.image_dims;
        match (&self.state, self.method) {
            (CompressorState::None, Method::Downsample) => downsample(image, m, n, self.stride),
            (CompressorState::Filter(k), Method::RandomConv | Method::Pnn) => {
                strided_correlation(image, m, n, k, self.stride)
            }
            (CompressorState::Pca(p), Method::Pca) => p.compress(image),
            (CompressorState::Circulant(p), Method::Circulant) => p.compress(image),
            _ => Err(Error::InvalidArgument(format!(
                "compressor state does not match method {}",
                self.method
            ))),
        }
    }

    pub fn apply_dataset(&self, data: &LabeledDataset) -> Result<CompressedDataset> {
        if (data.images.rows(), data.images.cols()) != self.image_dims {
            return Err(Error::dims(
                "apply_dataset",
                format!("{}x{}", self.image_dims.0, self.image_dims.1),
                format!("{}x{}", data.images.rows(), data.images.cols()),
            ));
        }
        let (gm, gn) = self.output_dims();
        let mut values = Vec::with_capacity(data.len() * gm * gn);
        for image in data.images.iter() {
            values.extend(self.apply(image)?);
        }
        CompressedDataset::new(gm, gn, values, data.labels.clone())
    }
}
