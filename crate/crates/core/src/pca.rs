//! Principal components of a vectorized image set.

use nalgebra::{DVector, SymmetricEigen};

use crate::dataset::ImageSet;
use crate::error::{Error, Result};
use crate::linalg::RealMatrix;

/// The leading `s` principal directions of an image set, stored as the rows
/// of an `s × mn` matrix with orthonormal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    rows: usize,
    cols: usize,
    components: RealMatrix,
    mean: Vec<f64>,
    singular_values: Vec<f64>,
}

/// Fits PCA on mean-centered data through a dense eigendecomposition of the
/// `mn × mn` scatter matrix.
///
/// Components are ordered by descending singular value. Each component is
/// signed so that its entry of largest magnitude is positive (lowest index
/// wins ties).
pub fn fit_pca(data: &ImageSet, s: usize) -> Result<PcaProjection> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = data.image_len();
    if s == 0 || s > dim {
        return Err(Error::InvalidArgument(format!(
            "component count {s} outside 1..={dim}"
        )));
    }
    crate::linalg::ensure_finite(data.pixels(), "fit_pca input")?;

    let count = data.len();
    let mut mean = vec![0.0; dim];
    for image in data.iter() {
        for (m, &x) in mean.iter_mut().zip(image) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= count as f64;
    }

    let centered = RealMatrix::from_fn(count, dim, |i, j| data.image(i)[j] - mean[j]);
    let scatter = centered.tr_mul(&centered);
    let eigen = SymmetricEigen::new(scatter);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut components = RealMatrix::zeros(s, dim);
    let mut singular_values = Vec::with_capacity(s);
    for (row, &k) in order.iter().take(s).enumerate() {
        let mut v: DVector<f64> = eigen.eigenvectors.column(k).into_owned();
        v /= v.norm();
        if v[dominant_index(v.as_slice())] < 0.0 {
            v.neg_mut();
        }
        components.set_row(row, &v.transpose());
        singular_values.push(eigen.eigenvalues[k].max(0.0).sqrt());
    }

    Ok(PcaProjection {
        rows: data.rows(),
        cols: data.cols(),
        components,
        mean,
        singular_values,
    })
}

fn dominant_index(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

impl PcaProjection {
    pub fn s(&self) -> usize {
        self.components.nrows()
    }

    pub fn image_dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// `s × mn`, rows `w_1 … w_s`.
    pub fn components(&self) -> &RealMatrix {
        &self.components
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Keeps the leading `s` components.
    pub fn truncate(&self, s: usize) -> Result<Self> {
        if s == 0 || s > self.s() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate {} components to {s}",
                self.s()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            components: self.components.rows(0, s).into_owned(),
            mean: self.mean.clone(),
            singular_values: self.singular_values[..s].to_vec(),
        })
    }

    /// Raw coefficients `P_s x`; the mean is not subtracted.
    pub fn compress(&self, image: &[f64]) -> Result<Vec<f64>> {
        self.check_len(image)?;
        Ok(self.project(image.iter().copied()))
    }

    /// Coefficients of the mean-centered image, `P_s (x − μ)`.
    pub fn compress_centered(&self, image: &[f64]) -> Result<Vec<f64>> {
        self.check_len(image)?;
        Ok(self.project(image.iter().zip(&self.mean).map(|(x, m)| x - m)))
    }

    /// `P_sᵀ c`.
    pub fn reconstruct(&self, coefficients: &[f64]) -> Result<Vec<f64>> {
        if coefficients.len() != self.s() {
            return Err(Error::dims("pca reconstruct", self.s(), coefficients.len()));
        }
        let c = DVector::from_column_slice(coefficients);
        Ok(self.components.tr_mul(&c).as_slice().to_vec())
    }

    fn project(&self, x: impl Iterator<Item = f64>) -> Vec<f64> {
        let x = DVector::from_iterator(self.mean.len(), x);
        (&self.components * x).as_slice().to_vec()
    }

    fn check_len(&self, image: &[f64]) -> Result<()> {
        if image.len() != self.mean.len() {
            return Err(Error::dims("pca image", self.mean.len(), image.len()));
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        rows: usize,
        cols: usize,
        components: RealMatrix,
        mean: Vec<f64>,
        singular_values: Vec<f64>,
    ) -> Result<Self> {
        if components.ncols() != rows * cols
            || mean.len() != rows * cols
            || singular_values.len() != components.nrows()
        {
            return Err(Error::dims(
                "pca parts",
                format!("{}x{} components", singular_values.len(), rows * cols),
                format!("{}x{}", components.nrows(), components.ncols()),
            ));
        }
        Ok(Self {
            rows,
            cols,
            components,
            mean,
            singular_values,
        })
    }
}
