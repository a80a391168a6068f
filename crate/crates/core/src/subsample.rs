//! Row subsampling of unitary BCCB matrices and the data-driven construction
//! of structured compression operators.
//!
//! A [`SubsampledProjection`] is the `s × mn` matrix made of selected rows of
//! a real unitary BCCB matrix. Applied to an image it computes a circular
//! 2D convolution and keeps the outputs at the sampled positions.

use num_complex::Complex64;

use crate::bccb::{self, UnitaryBccb};
use crate::dataset::ImageSet;
use crate::error::{Error, Result};
use crate::linalg::{complexify, RealMatrix};
use crate::pca::{fit_pca, PcaProjection};

/// An injective map from `0..s` into `0..mn` picking rows (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DownsamplingOperator {
    size: usize,
    indices: Vec<usize>,
    grid: (usize, usize),
}

impl DownsamplingOperator {
    /// Arbitrary index list. The output grid is `1 × s`.
    pub fn from_indices(size: usize, indices: Vec<usize>) -> Result<Self> {
        let s = indices.len();
        Self::with_grid(size, indices, (1, s))
    }

    pub(crate) fn with_grid(size: usize, indices: Vec<usize>, grid: (usize, usize)) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("sampler selects no rows".into()));
        }
        let mut seen = vec![false; size];
        for &i in &indices {
            if i >= size {
                return Err(Error::InvalidArgument(format!(
                    "sampler index {i} outside 0..{size}"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!("sampler index {i} repeated")));
            }
        }
        Ok(Self {
            size,
            indices,
            grid,
        })
    }

    pub fn s(&self) -> usize {
        self.indices.len()
    }

    /// Ambient dimension `mn`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Shape the sampled values are arranged in.
    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    /// `ψ(C)`: the selected rows of an `mn × mn` matrix.
    pub fn select_rows(&self, c: &RealMatrix) -> Result<RealMatrix> {
        if c.nrows() != self.size {
            return Err(Error::dims("select_rows", self.size, c.nrows()));
        }
        Ok(RealMatrix::from_fn(self.s(), c.ncols(), |i, j| {
            c[(self.indices[i], j)]
        }))
    }
}

/// Samples the raster positions `(a·k, b·k)` of an `m × n` image, row-major.
pub fn grid_sampler(m: usize, n: usize, stride: usize) -> Result<DownsamplingOperator> {
    if stride == 0 || stride > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "stride {stride} outside 1..={}",
            m.min(n)
        )));
    }
    let (gm, gn) = (m.div_ceil(stride), n.div_ceil(stride));
    let indices = (0..gm)
        .flat_map(|a| (0..gn).map(move |b| a * stride * n + b * stride))
        .collect();
    DownsamplingOperator::with_grid(m * n, indices, (gm, gn))
}

/// The stride whose grid sampler selects exactly `indices`, if any.
pub(crate) fn infer_stride(m: usize, n: usize, indices: &[usize]) -> Option<usize> {
    (1..=m.min(n)).find(|&k| grid_sampler(m, n, k).is_ok_and(|g| g.indices == indices))
}

/// Recognizes a stride grid so that stored index lists keep their 2D shape.
pub(crate) fn infer_grid(m: usize, n: usize, indices: &[usize]) -> (usize, usize) {
    match infer_stride(m, n, indices) {
        Some(k) => (m.div_ceil(k), n.div_ceil(k)),
        None => (1, indices.len()),
    }
}

/// `ρ_ψ(W)`: places row `i` of `W` at row `ψ(i)` of an `mn × mn` zero matrix.
pub fn zero_pad(w: &RealMatrix, sampler: &DownsamplingOperator) -> Result<RealMatrix> {
    if w.nrows() != sampler.s() || w.ncols() != sampler.size() {
        return Err(Error::dims(
            "zero_pad",
            format!("{}x{}", sampler.s(), sampler.size()),
            format!("{}x{}", w.nrows(), w.ncols()),
        ));
    }
    let mut out = RealMatrix::zeros(sampler.size(), sampler.size());
    for (i, &r) in sampler.indices().iter().enumerate() {
        out.set_row(r, &w.row(i));
    }
    Ok(out)
}

/// Selected rows of a real unitary BCCB matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsampledProjection {
    base: UnitaryBccb,
    sampler: DownsamplingOperator,
    rows: RealMatrix,
    row_major: Vec<f64>,
}

impl SubsampledProjection {
    pub fn new(base: UnitaryBccb, sampler: DownsamplingOperator) -> Result<Self> {
        if base.size() != sampler.size() {
            return Err(Error::dims("SubsampledProjection", base.size(), sampler.size()));
        }
        let h = base.first_column_real()?;
        let (m, n) = (base.m(), base.n());
        let mut row_major = Vec::with_capacity(sampler.s() * base.size());
        for &r in sampler.indices() {
            row_major.extend(UnitaryBccb::real_row(&h, r, m, n));
        }
        let rows = RealMatrix::from_row_slice(sampler.s(), base.size(), &row_major);
        Ok(Self {
            base,
            sampler,
            rows,
            row_major,
        })
    }

    pub fn base(&self) -> &UnitaryBccb {
        &self.base
    }

    pub fn sampler(&self) -> &DownsamplingOperator {
        &self.sampler
    }

    /// The cached `s × mn` matrix `ψ(C)`.
    pub fn rows(&self) -> &RealMatrix {
        &self.rows
    }

    pub fn s(&self) -> usize {
        self.sampler.s()
    }

    pub fn image_dims(&self) -> (usize, usize) {
        (self.base.m(), self.base.n())
    }

    pub fn output_grid(&self) -> (usize, usize) {
        self.sampler.grid()
    }

    /// `ψ(C) x` for a row-major image.
    pub fn compress(&self, image: &[f64]) -> Result<Vec<f64>> {
        if image.len() != self.base.size() {
            return Err(Error::dims("compress", self.base.size(), image.len()));
        }
        Ok(self
            .row_major
            .chunks_exact(image.len())
            .map(|row| row.iter().zip(image).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Same map evaluated through FFTs on the full operator.
    pub fn compress_fast(&self, image: &[f64]) -> Result<Vec<f64>> {
        let full = self.base.apply_fast(&complexify(image))?;
        Ok(self.sampler.indices().iter().map(|&r| full[r].re).collect())
    }
}

/// Builds the structured compression operator nearest to the leading `s`
/// principal components of `data`, where `s` is the sampler's row count.
///
/// The returned projection minimizes `‖P_s − B‖_F` over all `s × mn`
/// matrices `B` formed by the sampler's rows of a unitary BCCB matrix.
pub fn build_projection(
    data: &ImageSet,
    sampler: &DownsamplingOperator,
) -> Result<SubsampledProjection> {
    let pca = fit_pca(data, sampler.s())?;
    projection_from_pca(&pca, sampler)
}

/// The construction starting from an already fitted PCA basis. Only the
/// leading `sampler.s()` components are used.
pub fn projection_from_pca(
    pca: &PcaProjection,
    sampler: &DownsamplingOperator,
) -> Result<SubsampledProjection> {
    let (m, n) = pca.image_dims();
    if sampler.size() != m * n {
        return Err(Error::dims("build_projection sampler", m * n, sampler.size()));
    }
    let pca = if pca.s() == sampler.s() {
        pca.clone()
    } else {
        pca.truncate(sampler.s())?
    };
    nearest_subsampled(pca.components(), sampler, m, n)
}

/// Nearest element of `ψ(N_{m,n})` to an `s × mn` matrix, through the
/// zero-padding reduction to the full unitary BCCB problem.
pub fn nearest_subsampled(
    w: &RealMatrix,
    sampler: &DownsamplingOperator,
    m: usize,
    n: usize,
) -> Result<SubsampledProjection> {
    if w.nrows() != sampler.s() || w.ncols() != m * n || sampler.size() != m * n {
        return Err(Error::dims(
            "nearest_subsampled",
            format!("{}x{}", sampler.s(), m * n),
            format!("{}x{}", w.nrows(), w.ncols()),
        ));
    }
    // Only the sampled rows of ρ_ψ(W) are nonzero.
    let rows: Vec<Vec<Complex64>> = (0..w.nrows())
        .map(|i| w.row(i).iter().map(|&v| Complex64::new(v, 0.0)).collect())
        .collect();
    let base = bccb::nearest_from_rows(
        sampler
            .indices()
            .iter()
            .zip(&rows)
            .map(|(&r, row)| (r, row.as_slice())),
        m,
        n,
    )?;
    SubsampledProjection::new(base, sampler.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sampler_sizes() {
        assert_eq!(grid_sampler(28, 28, 3).unwrap().s(), 100);
        assert_eq!(grid_sampler(28, 28, 6).unwrap().s(), 25);
        assert_eq!(grid_sampler(28, 28, 6).unwrap().grid(), (5, 5));
        let id = grid_sampler(3, 4, 1).unwrap();
        assert_eq!(id.indices(), (0..12).collect::<Vec<_>>().as_slice());
        assert!(grid_sampler(28, 28, 0).is_err());
        assert!(grid_sampler(4, 6, 5).is_err());
    }

    #[test]
    fn grid_positions() {
        let g = grid_sampler(5, 5, 2).unwrap();
        assert_eq!(g.indices(), &[0, 2, 4, 10, 12, 14, 20, 22, 24]);
        assert_eq!(infer_grid(5, 5, g.indices()), (3, 3));
        assert_eq!(infer_grid(5, 5, &[3, 1]), (1, 2));
    }

    #[test]
    fn index_validation() {
        assert!(DownsamplingOperator::from_indices(4, vec![0, 0]).is_err());
        assert!(DownsamplingOperator::from_indices(4, vec![4]).is_err());
        assert!(DownsamplingOperator::from_indices(4, vec![]).is_err());
        assert!(DownsamplingOperator::from_indices(4, vec![3, 1]).is_ok());
    }

    #[test]
    fn zero_pad_basics() {
        let id = grid_sampler(2, 2, 1).unwrap();
        let w = RealMatrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64);
        assert_eq!(zero_pad(&w, &id).unwrap(), w);
        let sampler = DownsamplingOperator::from_indices(4, vec![2, 0]).unwrap();
        let w = RealMatrix::from_fn(2, 4, |i, j| (1 + i * 4 + j) as f64);
        let padded = zero_pad(&w, &sampler).unwrap();
        assert_eq!(padded.row(2), w.row(0));
        assert_eq!(padded.row(0), w.row(1));
        assert!(padded.row(1).iter().all(|&v| v == 0.0));
        assert!(zero_pad(&RealMatrix::zeros(2, 4), &sampler)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        assert!(zero_pad(&RealMatrix::zeros(3, 4), &sampler).is_err());
    }

    #[test]
    fn compress_rejects_wrong_length() {
        let p = SubsampledProjection::new(UnitaryBccb::identity(3, 3), grid_sampler(3, 3, 2).unwrap())
            .unwrap();
        assert!(p.compress(&[0.0; 8]).is_err());
        assert!(p.compress(&[0.0; 9]).unwrap().iter().all(|&v| v == 0.0));
        // Identity operator: compress is plain downsampling.
        let img: Vec<f64> = (0..9).map(f64::from).collect();
        let out = p.compress(&img).unwrap();
        for (a, b) in out.iter().zip([0.0, 2.0, 6.0, 8.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
