//! Dense matrix helpers and the unitary two-dimensional DFT.
//!
//! Vectors of length `m * n` are images in row-major order: entry `a * n + b`
//! is pixel `(a, b)`. Under this layout the 2D transform matrix is the
//! Kronecker product `F_m ⊗ F_n`, and block-circulant matrices with circulant
//! blocks have an `m × m` outer block structure of `n × n` circulant blocks.
//!
//! Sign convention: [`Dft2Plan::forward`] computes the usual analysis DFT
//! (`exp(-2πi jk/N)`) scaled by `1/√N` per axis. Writing `F` for the unitary
//! matrix with entries `exp(+2πi jk/N)/√N`, `forward` is `F* x` and
//! [`Dft2Plan::adjoint`] is `F x`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Largest `m * n` the dense routines are sized for.
pub const MAX_DENSE_SIZE: usize = 4096;

/// Precomputed 1D transforms for a unitary `m × n` two-dimensional DFT.
#[derive(Clone)]
pub struct Dft2Plan {
    m: usize,
    n: usize,
    rows_fwd: Arc<dyn Fft<f64>>,
    rows_inv: Arc<dyn Fft<f64>>,
    cols_fwd: Arc<dyn Fft<f64>>,
    cols_inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl fmt::Debug for Dft2Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dft2Plan")
            .field("m", &self.m)
            .field("n", &self.n)
            .finish()
    }
}

impl Dft2Plan {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "DFT dimensions must be positive, got {m}x{n}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            m,
            n,
            rows_fwd: planner.plan_fft_forward(n),
            rows_inv: planner.plan_fft_inverse(n),
            cols_fwd: planner.plan_fft_forward(m),
            cols_inv: planner.plan_fft_inverse(m),
            scale: 1.0 / ((m * n) as f64).sqrt(),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.m * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `F* x`: unitary analysis transform.
    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = x.to_vec();
        self.forward_in_place(&mut out)?;
        Ok(out)
    }

    /// `F x`: exact inverse of [`forward`](Self::forward).
    pub fn adjoint(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = x.to_vec();
        self.adjoint_in_place(&mut out)?;
        Ok(out)
    }

    pub fn forward_in_place(&self, x: &mut [Complex64]) -> Result<()> {
        self.transform(x, &self.rows_fwd, &self.cols_fwd)
    }

    pub fn adjoint_in_place(&self, x: &mut [Complex64]) -> Result<()> {
        self.transform(x, &self.rows_inv, &self.cols_inv)
    }

    fn transform(
        &self,
        x: &mut [Complex64],
        rows: &Arc<dyn Fft<f64>>,
        cols: &Arc<dyn Fft<f64>>,
    ) -> Result<()> {
        let (m, n) = (self.m, self.n);
        if x.len() != m * n {
            return Err(Error::dims("dft2", format!("length {}", m * n), x.len()));
        }
        if n > 1 {
            rows.process(x);
        }
        if m > 1 {
            let mut column = vec![Complex64::new(0.0, 0.0); m];
            for b in 0..n {
                for a in 0..m {
                    column[a] = x[a * n + b];
                }
                cols.process(&mut column);
                for a in 0..m {
                    x[a * n + b] = column[a];
                }
            }
        }
        for v in x.iter_mut() {
            *v *= self.scale;
        }
        Ok(())
    }
}

/// Dense `F = F_m ⊗ F_n`, so that `F* x` equals [`Dft2Plan::forward`].
pub fn dft_matrix(m: usize, n: usize) -> Result<ComplexMatrix> {
    let plan = Dft2Plan::new(m, n)?;
    let size = m * n;
    if size > MAX_DENSE_SIZE {
        return Err(Error::InvalidArgument(format!("dense DFT of size {size} is too large")));
    }
    let mut f_star = ComplexMatrix::zeros(size, size);
    let mut e = vec![Complex64::new(0.0, 0.0); size];
    for j in 0..size {
        e.fill(Complex64::new(0.0, 0.0));
        e[j] = Complex64::new(1.0, 0.0);
        plan.forward_in_place(&mut e)?;
        f_star.set_column(j, &nalgebra::DVector::from_column_slice(&e));
    }
    Ok(f_star.adjoint())
}

/// Real vector to complex.
pub fn complexify(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

pub fn frobenius_norm<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    a.iter()
        .map(|v| v.clone().modulus_squared())
        .sum::<f64>()
        .sqrt()
}

/// Chordal distance `½‖A*A − B*B‖_F` between the row spaces of two
/// matrices with orthonormal rows.
pub fn chordal_distance<T: ComplexField<RealField = f64>>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::dims(
            "chordal_distance",
            format!("{:?}", a.shape()),
            format!("{:?}", b.shape()),
        ));
    }
    let gram_a = a.adjoint() * a;
    let gram_b = b.adjoint() * b;
    Ok(0.5 * frobenius_norm(&(gram_a - gram_b)))
}

pub(crate) fn ensure_finite<'a>(
    values: impl IntoIterator<Item = &'a f64>,
    context: &'static str,
) -> Result<()> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Explicit `F*_{m,n}` with row-major Kronecker indexing.
    fn naive_forward_matrix(m: usize, n: usize) -> ComplexMatrix {
        let size = m * n;
        let scale = 1.0 / (size as f64).sqrt();
        ComplexMatrix::from_fn(size, size, |r, col| {
            let (p, q) = (r / n, r % n);
            let (a, b) = (col / n, col % n);
            let phase = -2.0 * PI * ((p * a) as f64 / m as f64 + (q * b) as f64 / n as f64);
            Complex64::from_polar(scale, phase)
        })
    }

    fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn impulse_is_flat() {
        let plan = Dft2Plan::new(2, 2).unwrap();
        let out = plan.forward(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        for v in out {
            assert!((v - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_concentrates_at_dc() {
        let plan = Dft2Plan::new(2, 2).unwrap();
        let out = plan.forward(&[c(1.0); 4]).unwrap();
        assert!(max_diff(&out, &[c(2.0), c(0.0), c(0.0), c(0.0)]) < 1e-15);
        let back = plan.adjoint(&out).unwrap();
        assert!(max_diff(&back, &[c(1.0); 4]) < 1e-15);
    }

    #[test]
    fn forward_matches_naive_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let plan = Dft2Plan::new(3, 4).unwrap();
        let x = random_vec(&mut rng, 12);
        let expected = naive_forward_matrix(3, 4) * nalgebra::DVector::from_vec(x.clone());
        assert!(max_diff(&plan.forward(&x).unwrap(), expected.as_slice()) < 1e-10);
    }

    #[test]
    fn adjoint_matches_naive_conjugate_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let plan = Dft2Plan::new(2, 3).unwrap();
        let x = random_vec(&mut rng, 6);
        let expected =
            naive_forward_matrix(2, 3).adjoint() * nalgebra::DVector::from_vec(x.clone());
        assert!(max_diff(&plan.adjoint(&x).unwrap(), expected.as_slice()) < 1e-10);
    }

    #[test]
    fn round_trip_up_to_1024() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(m, n) in &[(1, 1), (1, 7), (5, 1), (28, 28), (7, 13), (32, 32), (17, 19)] {
            let plan = Dft2Plan::new(m, n).unwrap();
            let x = random_vec(&mut rng, m * n);
            let back = plan.adjoint(&plan.forward(&x).unwrap()).unwrap();
            let err: f64 = x.iter().zip(&back).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
            let norm: f64 = x.iter().map(|a| a.norm_sqr()).sum::<f64>();
            assert!(err.sqrt() <= 1e-12 * norm.sqrt(), "{m}x{n}");
        }
    }

    #[test]
    fn conjugate_symmetric_spectrum_is_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (m, n) = (4, 6);
        let plan = Dft2Plan::new(m, n).unwrap();
        let real: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // The spectrum of real data is conjugate symmetric; its inverse must be real.
        let spectrum = plan.forward(&complexify(&real)).unwrap();
        for p in 0..m {
            for q in 0..n {
                let mirror = ((m - p) % m) * n + (n - q) % n;
                assert!((spectrum[p * n + q] - spectrum[mirror].conj()).norm() < 1e-12);
            }
        }
        let back = plan.adjoint(&spectrum).unwrap();
        assert!(back.iter().all(|v| v.im.abs() < 1e-10));
    }

    #[test]
    fn rejects_wrong_length() {
        let plan = Dft2Plan::new(3, 3).unwrap();
        let err = plan.forward(&[c(1.0); 8]).unwrap_err();
        assert!(err.to_string().contains("length 9"));
        assert!(Dft2Plan::new(0, 3).is_err());
    }

    #[test]
    fn frobenius_basics() {
        assert!((frobenius_norm(&RealMatrix::identity(3, 3)) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(frobenius_norm(&RealMatrix::zeros(2, 5)), 0.0);
    }

    #[test]
    fn frobenius_invariant_under_dft_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = naive_forward_matrix(2, 3);
        let a = ComplexMatrix::from_fn(6, 6, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let conj = u.adjoint() * &a * &u;
        assert!((frobenius_norm(&conj) - frobenius_norm(&a)).abs() < 1e-10);
    }

    #[test]
    fn chordal_examples() {
        let a = RealMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let b = RealMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        assert_eq!(chordal_distance(&a, &a).unwrap(), 0.0);
        assert!((chordal_distance(&a, &b).unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(chordal_distance(&a, &RealMatrix::zeros(2, 2)).is_err());
    }
}
