#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use compdl::dataset::{LabeledDataset, Split};
use compdl::io::encode_idx;
use compdl::linalg::{dft_matrix, ComplexMatrix, RealMatrix};
use compdl::nn::{LayerSpec, Mode, Network, NetworkSpec, Shape};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_real(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> RealMatrix {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))
}

pub fn to_complex(a: &RealMatrix) -> ComplexMatrix {
    a.map(|v| Complex64::new(v, 0.0))
}

/// `F diag(c) F*` built from the dense DFT matrix.
pub fn dense_bccb(spectrum: &[Complex64], m: usize, n: usize) -> ComplexMatrix {
    let f = dft_matrix(m, n).unwrap();
    let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(spectrum));
    &f * d * f.adjoint()
}

/// Rank-one members `F e_k e_kᵀ F*` of the BCCB basis, restricted to `rows`.
pub fn bccb_basis(m: usize, n: usize, rows: &[usize]) -> Vec<ComplexMatrix> {
    let size = m * n;
    (0..size)
        .map(|k| {
            let mut e = vec![Complex64::new(0.0, 0.0); size];
            e[k] = Complex64::new(1.0, 0.0);
            let full = dense_bccb(&e, m, n);
            ComplexMatrix::from_fn(rows.len(), size, |i, j| full[(rows[i], j)])
        })
        .collect()
}

pub fn phase(k: usize, points: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / points as f64)
}

/// Exhaustive search of `min ‖W − Σ c_k B_k‖_F` over the grid of `points`
/// phases per coordinate. Only practical for a handful of coordinates.
pub fn exhaustive_grid(w: &ComplexMatrix, basis: &[ComplexMatrix], points: usize) -> f64 {
    let dims = basis.len();
    let len = w.len();
    let flat: Vec<Vec<Complex64>> = basis.iter().map(|b| b.iter().copied().collect()).collect();
    let target: Vec<Complex64> = w.iter().copied().collect();
    // Partial sums per depth avoid recomputing shared prefixes.
    let mut partial = vec![vec![Complex64::new(0.0, 0.0); len]; dims + 1];
    let mut idx = vec![0usize; dims];
    let phases: Vec<Complex64> = (0..points).map(|k| phase(k, points)).collect();
    let mut best = f64::INFINITY;
    let mut depth = 0;
    loop {
        if depth == dims {
            let err: f64 = partial[dims]
                .iter()
                .zip(&target)
                .map(|(c, t)| (t - c).norm_sqr())
                .sum();
            best = best.min(err);
            depth -= 1;
            idx[depth] += 1;
            continue;
        }
        if idx[depth] == points {
            if depth == 0 {
                break;
            }
            idx[depth] = 0;
            depth -= 1;
            idx[depth] += 1;
            continue;
        }
        let c = phases[idx[depth]];
        let (lo, hi) = partial.split_at_mut(depth + 1);
        for ((out, prev), b) in hi[0].iter_mut().zip(&lo[depth]).zip(&flat[depth]) {
            *out = prev + c * b;
        }
        depth += 1;
    }
    best.sqrt()
}

/// Cyclic coordinate search of `min ‖W − Σ c_k B_k‖_F` on the phase grid,
/// evaluating the full objective for every trial.
pub fn coordinate_grid(w: &ComplexMatrix, basis: &[ComplexMatrix], points: usize, sweeps: usize) -> f64 {
    let phases: Vec<Complex64> = (0..points).map(|k| phase(k, points)).collect();
    let mut c = vec![Complex64::new(1.0, 0.0); basis.len()];
    let objective = |c: &[Complex64]| {
        let mut sum = w.clone();
        for (ck, b) in c.iter().zip(basis) {
            sum -= b * *ck;
        }
        sum.norm()
    };
    let mut best = objective(&c);
    for _ in 0..sweeps {
        for k in 0..c.len() {
            let mut keep = c[k];
            for &p in &phases {
                c[k] = p;
                let v = objective(&c);
                if v < best {
                    best = v;
                    keep = p;
                }
            }
            c[k] = keep;
        }
    }
    best
}

/// Random subset of `s` distinct indices from `0..size`, in random order.
pub fn random_indices(size: usize, s: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut all: Vec<usize> = (0..size).collect();
    all.shuffle(rng);
    all.truncate(s);
    all
}

/// Maximum relative error between backpropagated and central-difference
/// gradients of every parameter. `mode` must rebuild identical randomness
/// on every call.
pub fn gradient_check<F>(net: &Network, input: &[f64], labels: &[u8], mut mode: F) -> f64
where
    F: FnMut() -> Option<ChaCha8Rng>,
{
    let h = 1e-5;
    let mut eval = |net: &Network, want_grads: bool| {
        let mut r = mode();
        let m = match r.as_mut() {
            Some(r) => Mode::Train(r),
            None => Mode::Eval,
        };
        let (loss, grads) = net.loss_and_gradients(input, labels, m).unwrap();
        (loss, if want_grads { Some(grads) } else { None })
    };
    let grads = eval(net, true).1.unwrap();
    let mut worst: f64 = 0.0;
    let mut probe = net.clone();
    for (t, g) in grads.iter().enumerate() {
        for i in 0..g.values.len() {
            let orig = probe.params()[t].values[i];
            probe.params_mut()[t].values[i] = orig + h;
            let up = eval(&probe, false).0;
            probe.params_mut()[t].values[i] = orig - h;
            let down = eval(&probe, false).0;
            probe.params_mut()[t].values[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = g.values[i];
            let scale = analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic - numeric).abs() / scale);
        }
    }
    worst
}

pub fn conv(filters: usize, kernel: usize, stride: usize, bias: bool) -> LayerSpec {
    LayerSpec::Conv {
        filters,
        kernel,
        stride,
        bias,
    }
}

pub fn small_net(input: Shape, layers: Vec<LayerSpec>, seed: u64) -> Network {
    let spec = NetworkSpec::new(input, layers).unwrap();
    let mut net = Network::init(&spec, seed);
    // Nonzero biases so their gradients are exercised away from zero.
    let mut r = rng(seed ^ 0xb1a5);
    for t in net.params_mut() {
        if t.shape.len() == 1 {
            for v in &mut t.values {
                *v = r.gen_range(-0.1..0.1);
            }
        }
    }
    net
}

pub fn random_batch(len: usize, batch: usize, classes: usize, seed: u64) -> (Vec<f64>, Vec<u8>) {
    let mut r = rng(seed);
    let x = (0..len * batch).map(|_| r.gen_range(-1.0..1.0)).collect();
    let y = (0..batch).map(|_| r.gen_range(0..classes) as u8).collect();
    (x, y)
}

/// Writes a synthetic dataset in MNIST's IDX file layout.
pub fn write_idx_fixture(dir: &Path, train: usize, test: usize, side: usize, seed: u64) {
    for (split, count, prefix) in [(Split::Train, train, "train"), (Split::Test, test, "t10k")] {
        let data = LabeledDataset::synthetic(count, side, side, seed ^ split as u64);
        let (img, lab) = encode_idx(&data.images, &data.labels);
        std::fs::write(dir.join(format!("{prefix}-images-idx3-ubyte")), img).unwrap();
        std::fs::write(dir.join(format!("{prefix}-labels-idx1-ubyte")), lab).unwrap();
    }
}

/// Directory holding the real MNIST files, if present.
pub fn mnist_dir() -> Option<std::path::PathBuf> {
    let dir = compdl::experiment::data_dir(compdl::experiment::DatasetName::Mnist, None);
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist");
    [dir, root]
        .into_iter()
        .find(|d| compdl::io::load_mnist_dir(d, Split::Test).is_ok())
}
