use std::ops::Range;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rand::SeedableRng;

use super::spec::{param_shapes, LayerSpec, NetworkSpec, Shape};
use crate::error::{Error, Result};

/// Standard deviation of the initial weights; biases start at zero.
pub const INIT_STD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub enum Mode<'a> {
    Eval,
    /// Dropout active, masks drawn from the generator.
    Train(&'a mut ChaCha8Rng),
}

/// A network architecture with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    shapes: Vec<Shape>,
    params: Vec<Tensor>,
    slots: Vec<Range<usize>>,
}

enum Cache {
    None,
    Conv(Vec<f64>),
    Relu(Vec<f64>),
    Pool(Vec<usize>),
    Input(Vec<f64>),
    Dropout(Vec<f64>),
}

/// Result of a forward pass over a batch.
pub struct Forward {
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    caches: Vec<Cache>,
    batch: usize,
}

impl Network {
    /// Seeded initialization: weights `N(0, INIT_STD²)`, biases zero.
    pub fn init(spec: &NetworkSpec, seed: u64) -> Self {
        let mut net = Self::zeros(spec);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        for slot in &net.slots {
            // First tensor of each weighted layer is the weight; the rest are biases.
            if let Some(t) = net.params.get_mut(slot.start) {
                for v in &mut t.values {
                    *v = normal.sample(&mut rng);
                }
            }
        }
        net
    }

    pub fn zeros(spec: &NetworkSpec) -> Self {
        let shapes = spec.shapes().expect("spec validated at construction");
        let mut params = Vec::new();
        let mut slots = Vec::new();
        for (layer, &input) in spec.layers.iter().zip(&shapes) {
            let start = params.len();
            params.extend(param_shapes(layer, input).into_iter().map(Tensor::zeros));
            slots.push(start..params.len());
        }
        Self {
            spec: spec.clone(),
            shapes,
            params,
            slots,
        }
    }

    pub fn from_params(spec: &NetworkSpec, params: Vec<Tensor>) -> Result<Self> {
        let mut net = Self::zeros(spec);
        if params.len() != net.params.len() {
            return Err(Error::dims("network parameters", net.params.len(), params.len()));
        }
        for (expected, got) in net.params.iter().zip(&params) {
            if expected.shape != got.shape || got.values.len() != got.len() {
                return Err(Error::dims(
                    "parameter tensor",
                    format!("{:?}", expected.shape),
                    format!("{:?}", got.shape),
                ));
            }
        }
        crate::linalg::ensure_finite(params.iter().flat_map(|t| &t.values), "network parameters")?;
        net.params = params;
        Ok(net)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    /// Parameter tensors belonging to layer `index`.
    pub fn layer_params(&self, index: usize) -> &[Tensor] {
        &self.params[self.slots[index].clone()]
    }

    pub fn input_len(&self) -> usize {
        self.spec.input.len()
    }

    /// Class probabilities, one row of `classes` values per sample.
    pub fn forward(&self, input: &[f64], batch: usize, mode: Mode<'_>) -> Result<Vec<f64>> {
        Ok(self.run(input, batch, mode, false)?.probs)
    }

    pub fn logits(&self, input: &[f64], batch: usize) -> Result<Vec<f64>> {
        Ok(self.run(input, batch, Mode::Eval, false)?.logits)
    }

    pub fn predict(&self, input: &[f64], batch: usize) -> Result<Vec<usize>> {
        let classes = self.classes()?;
        let probs = self.forward(input, batch, Mode::Eval)?;
        Ok(probs.chunks_exact(classes).map(argmax).collect())
    }

    fn classes(&self) -> Result<usize> {
        self.spec
            .classes()
            .ok_or_else(|| Error::InvalidArgument("network does not end in softmax".into()))
    }

    /// Runs the layers; with `record` set, keeps what backpropagation needs.
    pub fn run(&self, input: &[f64], batch: usize, mode: Mode<'_>, record: bool) -> Result<Forward> {
        if batch == 0 || input.len() != batch * self.input_len() {
            return Err(Error::dims(
                "network input",
                format!("{batch} x {}", self.input_len()),
                input.len(),
            ));
        }
        let mut rng = match mode {
            Mode::Train(rng) => Some(rng),
            Mode::Eval => None,
        };
        let mut caches = Vec::with_capacity(self.spec.layers.len());
        let mut current = input.to_vec();
        let mut logits = Vec::new();
        for (i, layer) in self.spec.layers.iter().enumerate() {
            let (ins, outs) = (self.shapes[i], self.shapes[i + 1]);
            let params = &self.params[self.slots[i].clone()];
            let (next, cache) = match *layer {
                LayerSpec::Conv { kernel, stride, .. } => {
                    let (out, cols) = conv_forward(&current, batch, ins, outs, kernel, stride, params, record);
                    (out, cols.map_or(Cache::None, Cache::Conv))
                }
                LayerSpec::Relu => {
                    let out: Vec<f64> = current.iter().map(|&v| v.max(0.0)).collect();
                    let cache = if record { Cache::Relu(out.clone()) } else { Cache::None };
                    (out, cache)
                }
                LayerSpec::MaxPool2 => {
                    let (out, arg) = pool_forward(&current, batch, ins, outs);
                    (out, if record { Cache::Pool(arg) } else { Cache::None })
                }
                LayerSpec::Dense { .. } => {
                    let out = dense_forward(&current, batch, ins.len(), outs.len(), params);
                    (out, if record { Cache::Input(current) } else { Cache::None })
                }
                LayerSpec::Dropout { rate } => match rng.as_deref_mut() {
                    Some(rng) if rate > 0.0 => {
                        let keep = 1.0 / (1.0 - rate);
                        let mask: Vec<f64> = (0..current.len())
                            .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
                            .collect();
                        let out = current.iter().zip(&mask).map(|(x, m)| x * m).collect();
                        (out, if record { Cache::Dropout(mask) } else { Cache::None })
                    }
                    _ => (current, Cache::None),
                },
                LayerSpec::Softmax { .. } => {
                    let z = dense_forward(&current, batch, ins.len(), outs.len(), params);
                    logits = z.clone();
                    let probs = softmax_rows(&z, outs.len());
                    (probs, if record { Cache::Input(current) } else { Cache::None })
                }
            };
            caches.push(cache);
            current = next;
        }
        if logits.is_empty() {
            logits = current.clone();
        }
        Ok(Forward {
            logits,
            probs: current,
            caches,
            batch,
        })
    }

    /// Mean cross-entropy over the batch and its gradient with respect to
    /// every parameter tensor.
    pub fn loss_and_gradients(
        &self,
        input: &[f64],
        labels: &[u8],
        mode: Mode<'_>,
    ) -> Result<(f64, Vec<Tensor>)> {
        let classes = self.classes()?;
        let batch = labels.len();
        if labels.iter().any(|&l| l as usize >= classes) {
            return Err(Error::InvalidArgument("label outside class range".into()));
        }
        let fwd = self.run(input, batch, mode, true)?;
        let loss = cross_entropy(&fwd.logits, labels, classes);
        let grads = self.backward(&fwd, labels)?;
        Ok((loss, grads))
    }

    /// Gradients of the mean cross-entropy, given a recorded forward pass.
    pub fn backward(&self, fwd: &Forward, labels: &[u8]) -> Result<Vec<Tensor>> {
        let classes = self.classes()?;
        let batch = fwd.batch;
        if labels.len() != batch {
            return Err(Error::dims("backward labels", batch, labels.len()));
        }
        let mut grads: Vec<Tensor> = self.params.iter().map(|t| Tensor::zeros(t.shape.clone())).collect();

        // d(loss)/d(logits) = (p - onehot) / batch.
        let mut delta = fwd.probs.clone();
        for (row, &label) in delta.chunks_exact_mut(classes).zip(labels) {
            row[label as usize] -= 1.0;
            for v in row {
                *v /= batch as f64;
            }
        }

        for i in (0..self.spec.layers.len()).rev() {
            let (ins, outs) = (self.shapes[i], self.shapes[i + 1]);
            let slot = self.slots[i].clone();
            let params = &self.params[slot.clone()];
            let need_input = i > 0;
            let layer_grads = &mut grads[slot];
            delta = match (&self.spec.layers[i], &fwd.caches[i]) {
                (LayerSpec::Softmax { .. }, Cache::Input(x)) | (LayerSpec::Dense { .. }, Cache::Input(x)) => {
                    dense_backward(x, &delta, batch, ins.len(), outs.len(), params, layer_grads, need_input)
                }
                (LayerSpec::Conv { kernel, stride, .. }, Cache::Conv(cols)) => conv_backward(
                    cols, &delta, batch, ins, outs, *kernel, *stride, params, layer_grads, need_input,
                ),
                (LayerSpec::Relu, Cache::Relu(out)) => delta
                    .iter()
                    .zip(out)
                    .map(|(d, &o)| if o > 0.0 { *d } else { 0.0 })
                    .collect(),
                (LayerSpec::MaxPool2, Cache::Pool(arg)) => {
                    let mut d = vec![0.0; batch * ins.len()];
                    for (g, &idx) in delta.iter().zip(arg) {
                        d[idx] += g;
                    }
                    d
                }
                (LayerSpec::Dropout { .. }, Cache::Dropout(mask)) => {
                    delta.iter().zip(mask).map(|(d, m)| d * m).collect()
                }
                (LayerSpec::Dropout { .. }, Cache::None) => delta,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "forward pass for layer {i} was not recorded"
                    )))
                }
            };
        }
        Ok(grads)
    }
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax_rows(z: &[f64], classes: usize) -> Vec<f64> {
    let mut out = z.to_vec();
    for row in out.chunks_exact_mut(classes) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Mean of `logsumexp(z) − z_label` over the batch.
pub(crate) fn cross_entropy(logits: &[f64], labels: &[u8], classes: usize) -> f64 {
    let total: f64 = logits
        .chunks_exact(classes)
        .zip(labels)
        .map(|(row, &label)| {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            lse - row[label as usize]
        })
        .sum();
    total / labels.len() as f64
}

/// `c = a·b + beta·c` for row/column strided operands.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    (rsc, csc): (usize, usize),
) {
    if m == 0 || n == 0 {
        return;
    }
    let span = |rows: usize, cols: usize, rs: usize, cs: usize| (rows - 1) * rs + (cols - 1) * cs + 1;
    if k > 0 {
        assert!(a.len() >= span(m, k, rsa, csa) && b.len() >= span(k, n, rsb, csb));
    }
    assert!(c.len() >= span(m, n, rsc, csc));
    // SAFETY: the asserts above keep every strided access inside the slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            csc as isize,
        );
    }
}

fn dense_forward(x: &[f64], batch: usize, inputs: usize, units: usize, params: &[Tensor]) -> Vec<f64> {
    let (w, b) = (&params[0].values, &params[1].values);
    let mut out = Vec::with_capacity(batch * units);
    for _ in 0..batch {
        out.extend_from_slice(b);
    }
    // out[batch x units] += x[batch x inputs] · wᵀ, w stored units x inputs.
    gemm(batch, inputs, units, x, (inputs, 1), w, (1, inputs), 1.0, &mut out, (units, 1));
    out
}

#[allow(clippy::too_many_arguments)]
fn dense_backward(
    x: &[f64],
    delta: &[f64],
    batch: usize,
    inputs: usize,
    units: usize,
    params: &[Tensor],
    grads: &mut [Tensor],
    need_input: bool,
) -> Vec<f64> {
    {
        let (gw, gb) = grads.split_at_mut(1);
        gemm(units, batch, inputs, delta, (1, units), x, (inputs, 1), 1.0, &mut gw[0].values, (inputs, 1));
        for row in delta.chunks_exact(units) {
            for (g, d) in gb[0].values.iter_mut().zip(row) {
                *g += d;
            }
        }
    }
    if !need_input {
        return Vec::new();
    }
    let mut dx = vec![0.0; batch * inputs];
    gemm(batch, units, inputs, delta, (units, 1), &params[0].values, (inputs, 1), 0.0, &mut dx, (inputs, 1));
    dx
}

fn spatial(shape: Shape) -> (usize, usize, usize) {
    match shape {
        Shape::Spatial {
            channels,
            height,
            width,
        } => (channels, height, width),
        Shape::Flat(_) => unreachable!("validated spatial shape"),
    }
}

/// Unrolls the receptive fields of one sample into a `(C·k·k) × (OH·OW)`
/// row-major matrix. Window centers sit at `(oy·stride, ox·stride)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn im2col(
    x: &[f64],
    (c, h, w): (usize, usize, usize),
    kernel: usize,
    stride: usize,
    (oh, ow): (usize, usize),
    cols: &mut [f64],
) {
    let pad = kernel / 2;
    let p = oh * ow;
    for ch in 0..c {
        let plane = &x[ch * h * w..(ch + 1) * h * w];
        for dy in 0..kernel {
            for dx in 0..kernel {
                let row = &mut cols[((ch * kernel + dy) * kernel + dx) * p..][..p];
                for oy in 0..oh {
                    let y = (oy * stride + dy) as isize - pad as isize;
                    let dst = &mut row[oy * ow..(oy + 1) * ow];
                    if y < 0 || y >= h as isize {
                        dst.fill(0.0);
                        continue;
                    }
                    let src = &plane[y as usize * w..(y as usize + 1) * w];
                    for (ox, d) in dst.iter_mut().enumerate() {
                        let xx = (ox * stride + dx) as isize - pad as isize;
                        *d = if xx < 0 || xx >= w as isize { 0.0 } else { src[xx as usize] };
                    }
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn col2im_add(
    cols: &[f64],
    (c, h, w): (usize, usize, usize),
    kernel: usize,
    stride: usize,
    (oh, ow): (usize, usize),
    dx_out: &mut [f64],
) {
    let pad = kernel / 2;
    let p = oh * ow;
    for ch in 0..c {
        for dy in 0..kernel {
            for dxk in 0..kernel {
                let row = &cols[((ch * kernel + dy) * kernel + dxk) * p..][..p];
                for oy in 0..oh {
                    let y = (oy * stride + dy) as isize - pad as isize;
                    if y < 0 || y >= h as isize {
                        continue;
                    }
                    let base = ch * h * w + y as usize * w;
                    for ox in 0..ow {
                        let xx = (ox * stride + dxk) as isize - pad as isize;
                        if xx >= 0 && xx < w as isize {
                            dx_out[base + xx as usize] += row[oy * ow + ox];
                        }
                    }
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn conv_forward(
    x: &[f64],
    batch: usize,
    ins: Shape,
    outs: Shape,
    kernel: usize,
    stride: usize,
    params: &[Tensor],
    record: bool,
) -> (Vec<f64>, Option<Vec<f64>>) {
    let (c, h, w) = spatial(ins);
    let (f, oh, ow) = spatial(outs);
    let (k, p) = (c * kernel * kernel, oh * ow);
    let weights = &params[0].values;
    let mut out = vec![0.0; batch * f * p];
    let mut all_cols = if record { vec![0.0; batch * k * p] } else { Vec::new() };
    let mut scratch = if record { Vec::new() } else { vec![0.0; k * p] };
    for s in 0..batch {
        let cols: &mut [f64] = if record {
            &mut all_cols[s * k * p..(s + 1) * k * p]
        } else {
            &mut scratch
        };
        im2col(&x[s * c * h * w..(s + 1) * c * h * w], (c, h, w), kernel, stride, (oh, ow), cols);
        let o = &mut out[s * f * p..(s + 1) * f * p];
        if let Some(bias) = params.get(1) {
            for (row, b) in o.chunks_exact_mut(p).zip(&bias.values) {
                row.fill(*b);
            }
        }
        gemm(f, k, p, weights, (k, 1), cols, (p, 1), 1.0, o, (p, 1));
    }
    (out, record.then_some(all_cols))
}

#[allow(clippy::too_many_arguments)]
fn conv_backward(
    all_cols: &[f64],
    delta: &[f64],
    batch: usize,
    ins: Shape,
    outs: Shape,
    kernel: usize,
    stride: usize,
    params: &[Tensor],
    grads: &mut [Tensor],
    need_input: bool,
) -> Vec<f64> {
    let (c, h, w) = spatial(ins);
    let (f, oh, ow) = spatial(outs);
    let (k, p) = (c * kernel * kernel, oh * ow);
    let weights = &params[0].values;
    let mut dx = if need_input { vec![0.0; batch * c * h * w] } else { Vec::new() };
    let mut dcols = vec![0.0; if need_input { k * p } else { 0 }];
    for s in 0..batch {
        let cols = &all_cols[s * k * p..(s + 1) * k * p];
        let d = &delta[s * f * p..(s + 1) * f * p];
        gemm(f, p, k, d, (p, 1), cols, (1, p), 1.0, &mut grads[0].values, (k, 1));
        if let Some(gb) = grads.get_mut(1) {
            for (g, row) in gb.values.iter_mut().zip(d.chunks_exact(p)) {
                *g += row.iter().sum::<f64>();
            }
        }
        if need_input {
            gemm(k, f, p, weights, (1, k), d, (p, 1), 0.0, &mut dcols, (p, 1));
            col2im_add(&dcols, (c, h, w), kernel, stride, (oh, ow), &mut dx[s * c * h * w..(s + 1) * c * h * w]);
        }
    }
    dx
}

fn pool_forward(x: &[f64], batch: usize, ins: Shape, outs: Shape) -> (Vec<f64>, Vec<usize>) {
    let (c, h, w) = spatial(ins);
    let (_, oh, ow) = spatial(outs);
    let mut out = Vec::with_capacity(batch * c * oh * ow);
    let mut arg = Vec::with_capacity(batch * c * oh * ow);
    for s in 0..batch {
        for ch in 0..c {
            let base = (s * c + ch) * h * w;
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = base + 2 * oy * w + 2 * ox;
                    for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                        let idx = base + (2 * oy + dy) * w + 2 * ox + dx;
                        if x[idx] > x[best] {
                            best = idx;
                        }
                    }
                    out.push(x[best]);
                    arg.push(best);
                }
            }
        }
    }
    (out, arg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_is_uniform() {
        let spec = super::super::spec::build_architecture(5, 5).unwrap();
        let net = Network::zeros(&spec);
        let probs = net.forward(&vec![0.3; 50], 2, Mode::Eval).unwrap();
        assert_eq!(probs.len(), 20);
        assert!(probs.iter().all(|&p| (p - 0.1).abs() < 1e-15));
    }

    #[test]
    fn pool_prefers_first_maximum() {
        let x = [1.0, 1.0, 1.0, 1.0];
        let (out, arg) = pool_forward(&x, 1, Shape::spatial(1, 2, 2), Shape::spatial(1, 1, 1));
        assert_eq!(out, vec![1.0]);
        assert_eq!(arg, vec![0]);
    }

    #[test]
    fn rejects_bad_input_length() {
        let spec = super::super::spec::build_architecture(5, 5).unwrap();
        let net = Network::zeros(&spec);
        assert!(net.forward(&[0.0; 24], 1, Mode::Eval).is_err());
        assert!(net.forward(&[], 0, Mode::Eval).is_err());
    }

    #[test]
    fn from_params_checks_shapes() {
        let spec = super::super::spec::build_reduced_architecture(5).unwrap();
        let net = Network::init(&spec, 1);
        let mut params = net.params().to_vec();
        assert!(Network::from_params(&spec, params.clone()).is_ok());
        params[0].shape = vec![1];
        assert!(Network::from_params(&spec, params).is_err());
    }
}
