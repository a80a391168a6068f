//! Architecture descriptions, parameter counts and FLOP counts.

use std::fmt;

use crate::error::{Error, Result};

/// Side length of every convolution kernel in the benchmark architectures.
pub const KERNEL: usize = 5;

pub const DEFAULT_DROPOUT: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    /// `filters` kernels of size `kernel × kernel`, zero padding of
    /// `kernel / 2` on every side, evaluated every `stride` pixels.
    Conv {
        filters: usize,
        kernel: usize,
        stride: usize,
        bias: bool,
    },
    Relu,
    /// 2×2 window, stride 2, trailing odd row/column dropped.
    MaxPool2,
    /// Fully connected layer; flattens a `C × H × W` input.
    Dense { units: usize },
    Dropout { rate: f64 },
    /// Affine map to `classes` logits followed by softmax.
    Softmax { classes: usize },
}

/// Activation shape between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Spatial {
        channels: usize,
        height: usize,
        width: usize,
    },
    Flat(usize),
}

impl Shape {
    pub fn spatial(channels: usize, height: usize, width: usize) -> Self {
        Shape::Spatial {
            channels,
            height,
            width,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Shape::Spatial {
                channels,
                height,
                width,
            } => channels * height * width,
            Shape::Flat(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Spatial {
                channels,
                height,
                width,
            } => write!(f, "{channels}x{height}x{width}"),
            Shape::Flat(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub input: Shape,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn new(input: Shape, layers: Vec<LayerSpec>) -> Result<Self> {
        let spec = Self { input, layers };
        spec.shapes()?;
        Ok(spec)
    }

    /// Activation shapes: `shapes[0]` is the input, `shapes[i + 1]` the
    /// output of layer `i`.
    pub fn shapes(&self) -> Result<Vec<Shape>> {
        let mut shapes = vec![self.input];
        let mut current = self.input;
        if current.is_empty() {
            return Err(invalid("empty input shape"));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            current = next_shape(current, layer).map_err(|e| invalid(format!("layer {i}: {e}")))?;
            shapes.push(current);
        }
        Ok(shapes)
    }

    pub fn output(&self) -> Shape {
        *self.shapes().expect("validated").last().unwrap()
    }

    pub fn classes(&self) -> Option<usize> {
        match self.layers.last() {
            Some(LayerSpec::Softmax { classes }) => Some(*classes),
            _ => None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn next_shape(shape: Shape, layer: &LayerSpec) -> std::result::Result<Shape, String> {
    match (*layer, shape) {
        (
            LayerSpec::Conv {
                filters,
                kernel,
                stride,
                ..
            },
            Shape::Spatial { height, width, .. },
        ) => {
            if filters == 0 || kernel == 0 || kernel % 2 == 0 || stride == 0 {
                return Err(format!("bad conv parameters {layer:?}"));
            }
            Ok(Shape::spatial(
                filters,
                height.div_ceil(stride),
                width.div_ceil(stride),
            ))
        }
        (LayerSpec::Conv { .. }, Shape::Flat(_)) => Err("convolution after flatten".into()),
        (
            LayerSpec::MaxPool2,
            Shape::Spatial {
                channels,
                height,
                width,
            },
        ) => {
            if height < 2 || width < 2 {
                return Err(format!("cannot pool {height}x{width}"));
            }
            Ok(Shape::spatial(channels, height / 2, width / 2))
        }
        (LayerSpec::MaxPool2, Shape::Flat(_)) => Err("pooling after flatten".into()),
        (LayerSpec::Dense { units }, _) | (LayerSpec::Softmax { classes: units }, _) => {
            if units == 0 {
                return Err("zero units".into());
            }
            Ok(Shape::Flat(units))
        }
        (LayerSpec::Dropout { rate }, s) => {
            if !(0.0..1.0).contains(&rate) {
                return Err(format!("dropout rate {rate} outside [0, 1)"));
            }
            Ok(s)
        }
        (LayerSpec::Relu, s) => Ok(s),
    }
}

fn conv(filters: usize) -> LayerSpec {
    LayerSpec::Conv {
        filters,
        kernel: KERNEL,
        stride: 1,
        bias: true,
    }
}

fn head() -> [LayerSpec; 4] {
    [
        LayerSpec::Dense { units: 256 },
        LayerSpec::Relu,
        LayerSpec::Dropout {
            rate: DEFAULT_DROPOUT,
        },
        LayerSpec::Softmax { classes: 10 },
    ]
}

/// Classifier for square inputs of side 28, 14, 10, 7, 6 or 5.
///
/// `conv32 → [pool] → conv64 → [pool] → FC256 → dropout → softmax10`; the
/// first pool is present for sides of at least 10, the second only for 28.
pub fn build_architecture(height: usize, width: usize) -> Result<NetworkSpec> {
    const SUPPORTED: [usize; 6] = [28, 14, 10, 7, 6, 5];
    if height != width || !SUPPORTED.contains(&height) {
        return Err(invalid(format!(
            "no standard architecture for {height}x{width} inputs; supply an explicit NetworkSpec"
        )));
    }
    let mut layers = vec![conv(32), LayerSpec::Relu];
    if height >= 10 {
        layers.push(LayerSpec::MaxPool2);
    }
    layers.extend([conv(64), LayerSpec::Relu]);
    if height == 28 {
        layers.push(LayerSpec::MaxPool2);
    }
    layers.extend(head());
    NetworkSpec::new(Shape::spatial(1, height, width), layers)
}

/// Filter counts of the reduced 5×5-input networks, indexed 1 through 5.
pub const REDUCED_FILTERS: [(usize, usize); 5] = [(32, 64), (16, 32), (8, 16), (4, 8), (2, 4)];

pub fn build_reduced_architecture(index: usize) -> Result<NetworkSpec> {
    let &(first, second) = index
        .checked_sub(1)
        .and_then(|i| REDUCED_FILTERS.get(i))
        .ok_or_else(|| invalid(format!("reduced architecture index {index} outside 1..=5")))?;
    let mut layers = vec![conv(first), LayerSpec::Relu, conv(second), LayerSpec::Relu];
    layers.extend(head());
    NetworkSpec::new(Shape::spatial(1, 5, 5), layers)
}

/// Prepends a single-filter, bias-free strided convolution to `spec`. The
/// new input is `raw_height × raw_width`, which the stride must map onto
/// the original input.
pub fn pnn_wrap(
    spec: &NetworkSpec,
    stride: usize,
    raw_height: usize,
    raw_width: usize,
) -> Result<NetworkSpec> {
    let zeroth = LayerSpec::Conv {
        filters: 1,
        kernel: KERNEL,
        stride,
        bias: false,
    };
    let raw = Shape::spatial(1, raw_height, raw_width);
    let produced = next_shape(raw, &zeroth).map_err(invalid)?;
    if produced != spec.input {
        return Err(Error::dims("pnn_wrap", spec.input, produced));
    }
    let mut layers = vec![zeroth];
    layers.extend(spec.layers.iter().copied());
    NetworkSpec::new(raw, layers)
}

/// Parameter tensor shapes of one layer given its input shape.
pub(crate) fn param_shapes(layer: &LayerSpec, input: Shape) -> Vec<Vec<usize>> {
    match (*layer, input) {
        (
            LayerSpec::Conv {
                filters,
                kernel,
                bias,
                ..
            },
            Shape::Spatial { channels, .. },
        ) => {
            let mut v = vec![vec![filters, channels, kernel, kernel]];
            if bias {
                v.push(vec![filters]);
            }
            v
        }
        (LayerSpec::Dense { units }, s) | (LayerSpec::Softmax { classes: units }, s) => {
            vec![vec![units, s.len()], vec![units]]
        }
        _ => Vec::new(),
    }
}

/// Total number of trainable weights, biases included.
pub fn weight_count(spec: &NetworkSpec) -> usize {
    let shapes = spec.shapes().expect("validated");
    spec.layers
        .iter()
        .zip(&shapes)
        .flat_map(|(layer, &input)| param_shapes(layer, input))
        .map(|s| s.iter().product::<usize>())
        .sum()
}

/// Floating point operations of one forward pass, counted as two per
/// multiply-accumulate in convolution and hidden fully connected layers.
/// Bias, activation, pooling, dropout and the softmax layer are excluded.
pub fn flop_count(spec: &NetworkSpec) -> u64 {
    let shapes = spec.shapes().expect("validated");
    let mut macs: u64 = 0;
    for (i, layer) in spec.layers.iter().enumerate() {
        let (input, output) = (shapes[i], shapes[i + 1]);
        match (*layer, input, output) {
            (
                LayerSpec::Conv { kernel, .. },
                Shape::Spatial { channels, .. },
                Shape::Spatial {
                    channels: filters,
                    height,
                    width,
                },
            ) => {
                macs += (height * width * filters * kernel * kernel * channels) as u64;
            }
            (LayerSpec::Dense { units }, input, _) => {
                macs += (input.len() * units) as u64;
            }
            _ => {}
        }
    }
    2 * macs
}

pub fn mega_flops(spec: &NetworkSpec) -> f64 {
    flop_count(spec) as f64 / 1e6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_weight_counts() {
        let expected = [
            (28, 857_738),
            (14, 857_738),
            (10, 464_522),
            (7, 857_738),
            (6, 644_746),
            (5, 464_522),
        ];
        for (side, count) in expected {
            assert_eq!(weight_count(&build_architecture(side, side).unwrap()), count, "{side}");
        }
        let reduced = [464_522, 220_874, 108_650, 54_938, 28_682];
        for (i, count) in reduced.into_iter().enumerate() {
            assert_eq!(weight_count(&build_reduced_architecture(i + 1).unwrap()), count);
        }
    }

    #[test]
    fn flop_counts() {
        assert_eq!(flop_count(&build_architecture(28, 28).unwrap()), 22_930_432);
        assert_eq!(flop_count(&build_architecture(5, 5).unwrap()), 3_419_200);
        let reduced5 = mega_flops(&build_reduced_architecture(5).unwrap());
        assert_eq!(format!("{reduced5:.2}"), "0.06");
    }

    #[test]
    fn single_dense_layer() {
        let spec =
            NetworkSpec::new(Shape::Flat(2), vec![LayerSpec::Softmax { classes: 3 }]).unwrap();
        assert_eq!(weight_count(&spec), 9);
        assert_eq!(flop_count(&spec), 0);
    }

    #[test]
    fn reduced_index_one_is_stride_six_network() {
        assert_eq!(
            build_reduced_architecture(1).unwrap(),
            build_architecture(5, 5).unwrap()
        );
        assert!(build_reduced_architecture(0).is_err());
        assert!(build_reduced_architecture(6).is_err());
    }

    #[test]
    fn unsupported_inputs() {
        assert!(build_architecture(9, 9).is_err());
        assert!(build_architecture(28, 14).is_err());
    }

    #[test]
    fn pnn_wrapping() {
        let base = build_architecture(28, 28).unwrap();
        let wrapped = pnn_wrap(&base, 1, 28, 28).unwrap();
        assert_eq!(wrapped.shapes().unwrap()[1], Shape::spatial(1, 28, 28));
        assert_eq!(weight_count(&wrapped) - weight_count(&base), 25);
        let base6 = build_architecture(5, 5).unwrap();
        let wrapped6 = pnn_wrap(&base6, 6, 28, 28).unwrap();
        assert_eq!(wrapped6.shapes().unwrap()[1], Shape::spatial(1, 5, 5));
        assert!(pnn_wrap(&base6, 5, 28, 28).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(NetworkSpec::new(
            Shape::Flat(4),
            vec![LayerSpec::Conv {
                filters: 1,
                kernel: 3,
                stride: 1,
                bias: true
            }]
        )
        .is_err());
        assert!(NetworkSpec::new(Shape::spatial(1, 1, 1), vec![LayerSpec::MaxPool2]).is_err());
        assert!(NetworkSpec::new(Shape::Flat(3), vec![LayerSpec::Dropout { rate: 1.0 }]).is_err());
    }
}
