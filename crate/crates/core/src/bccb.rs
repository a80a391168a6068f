//! Unitary block-circulant matrices with circulant blocks (BCCB), kept in
//! spectral form.
//!
//! Every BCCB matrix of shape `(m, n)` is diagonalized by the same unitary
//! 2D DFT, so the unitary members of the family are exactly
//! `C = F diag(ĉ) F*` with `|ĉ_i| = 1`. [`UnitaryBccb`] stores only `ĉ`.
//!
//! The entry `C[r, c]` depends only on the wrapped offset `r ⊖ c` (row and
//! column offsets taken separately modulo `m` and `n`), and equals
//! `h[r ⊖ c]` for the first column `h = F ĉ / √(mn)`.

use nalgebra::Complex;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Dft2Plan, RealMatrix};

/// Relative magnitude below which a diagonal entry counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Imaginary residue tolerated when reading a conjugate-symmetric operator
/// as a real matrix.
pub const REAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryBccb {
    m: usize,
    n: usize,
    spectrum: Vec<Complex64>,
}

impl UnitaryBccb {
    /// `θ_F(c) = F diag(c) F*`. Entries are renormalized onto the unit circle.
    pub fn from_spectrum(spectrum: Vec<Complex64>, m: usize, n: usize) -> Result<Self> {
        if spectrum.len() != m * n || m == 0 || n == 0 {
            return Err(Error::dims("from_spectrum", m * n, spectrum.len()));
        }
        let mut spectrum = spectrum;
        for (i, v) in spectrum.iter_mut().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite("bccb spectrum"));
            }
            let r = v.norm();
            if r < 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "spectrum entry {i} has modulus {r:e}; cannot normalize onto the unit circle"
                )));
            }
            *v /= r;
        }
        Ok(Self { m, n, spectrum })
    }

    /// Keeps the entries as given; they must already lie on the unit circle.
    pub(crate) fn from_unit_spectrum(spectrum: Vec<Complex64>, m: usize, n: usize) -> Result<Self> {
        if spectrum.len() != m * n || m == 0 || n == 0 {
            return Err(Error::dims("from_unit_spectrum", m * n, spectrum.len()));
        }
        if let Some(i) = spectrum.iter().position(|v| !((v.norm() - 1.0).abs() < 1e-9)) {
            return Err(Error::InvalidArgument(format!(
                "spectrum entry {i} is not unit modulus"
            )));
        }
        Ok(Self { m, n, spectrum })
    }

    pub fn identity(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            spectrum: vec![Complex64::new(1.0, 0.0); m * n],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.m * self.n
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn plan(&self) -> Dft2Plan {
        Dft2Plan::new(self.m, self.n).expect("dimensions validated at construction")
    }

    /// Whether `ĉ[-k] = conj(ĉ[k])` for all `k`, which makes the matrix real.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let (m, n) = (self.m, self.n);
        (0..m * n).all(|k| {
            let mirror = mirror_index(k, m, n);
            (self.spectrum[k] - self.spectrum[mirror].conj()).norm() <= tol
        })
    }

    /// First column `h` of the materialized matrix.
    pub fn first_column(&self) -> Vec<Complex64> {
        let plan = self.plan();
        let scale = 1.0 / (self.size() as f64).sqrt();
        let mut h = plan.adjoint(&self.spectrum).expect("length matches plan");
        for v in &mut h {
            *v *= scale;
        }
        h
    }

    /// Real first column; fails when the spectrum is not conjugate symmetric.
    pub fn first_column_real(&self) -> Result<Vec<f64>> {
        let h = self.first_column();
        let residue = h.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if residue >= REAL_TOLERANCE {
            return Err(Error::Numeric(format!(
                "BCCB matrix is not real (imaginary residue {residue:e})"
            )));
        }
        Ok(h.into_iter().map(|v| v.re).collect())
    }

    /// Dense `F diag(ĉ) F*`.
    pub fn materialize(&self) -> ComplexMatrix {
        let h = self.first_column();
        let (m, n) = (self.m, self.n);
        ComplexMatrix::from_fn(m * n, m * n, |r, c| h[wrapped_offset(r, c, m, n)])
    }

    /// Dense real matrix, valid when the spectrum is conjugate symmetric.
    pub fn materialize_real(&self) -> Result<RealMatrix> {
        let h = self.first_column_real()?;
        let (m, n) = (self.m, self.n);
        Ok(RealMatrix::from_fn(m * n, m * n, |r, c| {
            h[wrapped_offset(r, c, m, n)]
        }))
    }

    /// Row `r` of the materialized real matrix, from a precomputed first column.
    pub(crate) fn real_row(h: &[f64], r: usize, m: usize, n: usize) -> Vec<f64> {
        (0..m * n).map(|c| h[wrapped_offset(r, c, m, n)]).collect()
    }

    /// `C x` in `O(mn log mn)` via two 2D FFTs.
    pub fn apply_fast(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.size() {
            return Err(Error::dims("apply_fast", self.size(), x.len()));
        }
        let plan = self.plan();
        let mut buf = plan.forward(x)?;
        for (v, s) in buf.iter_mut().zip(&self.spectrum) {
            *v *= s;
        }
        plan.adjoint_in_place(&mut buf)?;
        Ok(buf)
    }
}

/// Index of `-k` in the row-major `(m, n)` frequency grid.
pub(crate) fn mirror_index(k: usize, m: usize, n: usize) -> usize {
    let (p, q) = (k / n, k % n);
    ((m - p) % m) * n + (n - q) % n
}

/// Row-major index of the 2D offset `r ⊖ c`.
#[inline]
pub(crate) fn wrapped_offset(r: usize, c: usize, m: usize, n: usize) -> usize {
    let (ra, rb) = (r / n, r % n);
    let (ca, cb) = (c / n, c % n);
    ((ra + m - ca) % m) * n + (rb + n - cb) % n
}

/// `diag(F* W F)` for a matrix given by its nonzero rows.
///
/// Uses `(F* W F)_kk = (1/mn) Σ_d g_d ω^{d·k}` where `g_d` sums `W` along the
/// wrapped diagonal `{(r, r ⊕ d)}`; this is one inverse FFT of `g`.
pub fn bccb_diagonal<'a, I>(rows: I, m: usize, n: usize) -> Result<Vec<Complex64>>
where
    I: IntoIterator<Item = (usize, &'a [Complex64])>,
{
    let size = m * n;
    let mut g = vec![Complex64::new(0.0, 0.0); size];
    for (r, row) in rows {
        if r >= size || row.len() != size {
            return Err(Error::dims(
                "bccb_diagonal row",
                format!("index < {size}, length {size}"),
                format!("index {r}, length {}", row.len()),
            ));
        }
        let (ra, rb) = (r / n, r % n);
        for (c, &w) in row.iter().enumerate() {
            let (ca, cb) = (c / n, c % n);
            let d = ((ca + m - ra) % m) * n + (cb + n - rb) % n;
            g[d] += w;
        }
    }
    let plan = Dft2Plan::new(m, n)?;
    plan.adjoint_in_place(&mut g)?;
    let scale = 1.0 / (size as f64).sqrt();
    for v in &mut g {
        *v *= scale;
    }
    Ok(g)
}

/// Projects a diagonal onto the torus: `y_i / |y_i|`, or `1` where `y_i` is
/// numerically zero.
pub fn normalize_to_torus(y: &[Complex64]) -> Vec<Complex64> {
    let max = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let one = Complex64::new(1.0, 0.0);
    if max == 0.0 || !max.is_finite() {
        return vec![one; y.len()];
    }
    let cutoff = ZERO_THRESHOLD * max;
    y.iter()
        .map(|&v| {
            let r = v.norm();
            if r <= cutoff {
                one
            } else {
                v / r
            }
        })
        .collect()
}

/// The unitary BCCB matrix nearest to `w` in Frobenius norm.
pub fn nearest_unitary_bccb<T>(w: &nalgebra::DMatrix<T>, m: usize, n: usize) -> Result<UnitaryBccb>
where
    T: nalgebra::ComplexField<RealField = f64> + Copy + Into<Complex<f64>>,
{
    let size = m * n;
    if w.shape() != (size, size) {
        return Err(Error::dims(
            "nearest_unitary_bccb",
            format!("{size}x{size}"),
            format!("{}x{}", w.nrows(), w.ncols()),
        ));
    }
    let rows: Vec<Vec<Complex64>> = (0..size)
        .map(|r| {
            w.row(r)
                .iter()
                .map(|&v| {
                    let c: Complex64 = v.into();
                    c
                })
                .collect()
        })
        .collect();
    if rows.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("nearest_unitary_bccb input"));
    }
    nearest_from_rows(rows.iter().enumerate().map(|(r, v)| (r, v.as_slice())), m, n)
}

/// Nearest unitary BCCB to the matrix whose only nonzero rows are given.
pub fn nearest_from_rows<'a, I>(rows: I, m: usize, n: usize) -> Result<UnitaryBccb>
where
    I: IntoIterator<Item = (usize, &'a [Complex64])>,
{
    let y = bccb_diagonal(rows, m, n)?;
    Ok(UnitaryBccb {
        m,
        n,
        spectrum: normalize_to_torus(&y),
    })
}
