//! In-memory image collections.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const NUM_CLASSES: usize = 10;

/// A stack of equally sized single-channel images, stored contiguously in
/// row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
}

impl ImageSet {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if pixels.len() % (rows * cols) != 0 {
            return Err(Error::dims(
                "ImageSet",
                format!("a multiple of {}", rows * cols),
                pixels.len(),
            ));
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn from_images<I, V>(rows: usize, cols: usize, images: I) -> Result<Self>
    where
        I: IntoIterator<Item = V>,
        V: AsRef<[f64]>,
    {
        let mut pixels = Vec::new();
        for image in images {
            let image = image.as_ref();
            if image.len() != rows * cols {
                return Err(Error::dims("ImageSet image", rows * cols, image.len()));
            }
            pixels.extend_from_slice(image);
        }
        Self::new(rows, cols, pixels)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn image_len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn len(&self) -> usize {
        self.pixels.len() / self.image_len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn image(&self, index: usize) -> &[f64] {
        let len = self.image_len();
        &self.pixels[index * len..(index + 1) * len]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.pixels.chunks_exact(self.image_len())
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let mut pixels = Vec::with_capacity(indices.len() * self.image_len());
        for &i in indices {
            pixels.extend_from_slice(self.image(i));
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            pixels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Images with class labels in `0..10`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub images: ImageSet,
    pub labels: Vec<u8>,
    pub split: Split,
}

impl LabeledDataset {
    pub fn new(images: ImageSet, labels: Vec<u8>, split: Split) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::CountMismatch {
                images: images.len(),
                labels: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(Error::InvalidArgument(format!("label {bad} out of range")));
        }
        Ok(Self {
            images,
            labels,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            images: self.images.select(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            split: self.split,
        }
    }

    /// Seeded random subset of `count` samples (the whole set, shuffled,
    /// when `count >= len`).
    pub fn subset(&self, count: usize, seed: u64) -> Self {
        let mut indices: Vec<usize> = (0..self.len()).collect();
        indices.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        indices.truncate(count.min(self.len()));
        self.select(&indices)
    }

    /// Seeded toy images: class `c` is a bar at angle `c·18°` through a
    /// jittered centre, plus uniform noise. Pixels lie in `[0, 1]`.
    pub fn synthetic(count: usize, rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pixels = Vec::with_capacity(count * rows * cols);
        let mut labels = Vec::with_capacity(count);
        for i in 0..count {
            let label = (i % NUM_CLASSES) as u8;
            let angle = label as f64 * std::f64::consts::PI / NUM_CLASSES as f64;
            let (dy, dx) = angle.sin_cos();
            let cy = rows as f64 / 2.0 + rng.gen_range(-1.0..1.0);
            let cx = cols as f64 / 2.0 + rng.gen_range(-1.0..1.0);
            let width = rows.min(cols) as f64 / 10.0 + 0.5;
            for y in 0..rows {
                for x in 0..cols {
                    let (py, px) = (y as f64 - cy, x as f64 - cx);
                    let dist = (py * dx - px * dy).abs();
                    let v: f64 = if dist < width { 0.9 } else { 0.0 };
                    pixels.push((v + rng.gen_range(0.0..0.1)).min(1.0));
                }
            }
            labels.push(label);
        }
        let images = ImageSet::new(rows, cols, pixels).expect("consistent sizes");
        Self::new(images, labels, Split::Train).expect("labels in range")
    }
}

/// Single-channel 2D arrays with labels: raw or compressed classifier input.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedDataset {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
    pub labels: Vec<u8>,
}

impl CompressedDataset {
    pub fn new(height: usize, width: usize, values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidArgument(format!(
                "array dimensions must be positive, got {height}x{width}"
            )));
        }
        if values.len() != labels.len() * height * width {
            return Err(Error::dims(
                "CompressedDataset",
                format!("{} values", labels.len() * height * width),
                values.len(),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(Error::InvalidArgument(format!("label {bad} out of range")));
        }
        Ok(Self {
            height,
            width,
            values,
            labels,
        })
    }

    /// Uncompressed view of a labeled image set.
    pub fn from_labeled(data: &LabeledDataset) -> Self {
        Self {
            height: data.images.rows(),
            width: data.images.cols(),
            values: data.images.pixels().to_vec(),
            labels: data.labels.clone(),
        }
    }

    pub fn sample_len(&self) -> usize {
        self.height * self.width
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample(&self, index: usize) -> &[f64] {
        let len = self.sample_len();
        &self.values[index * len..(index + 1) * len]
    }

    /// Concatenated samples and labels at `indices`.
    pub fn gather(&self, indices: &[usize]) -> (Vec<f64>, Vec<u8>) {
        let mut values = Vec::with_capacity(indices.len() * self.sample_len());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        (values, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_access() {
        let set = ImageSet::new(1, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.image(1), &[3.0, 4.0]);
        assert!(ImageSet::new(2, 2, vec![0.0; 6]).is_err());
    }

    #[test]
    fn subset_is_seeded() {
        let images = ImageSet::new(1, 1, (0..20).map(f64::from).collect()).unwrap();
        let data =
            LabeledDataset::new(images, (0..20).map(|i| (i % 10) as u8).collect(), Split::Train)
                .unwrap();
        let a = data.subset(5, 9);
        assert_eq!(a, data.subset(5, 9));
        assert_eq!(a.len(), 5);
        assert_ne!(a, data.subset(5, 10));
    }

    #[test]
    fn label_checks() {
        let images = ImageSet::new(1, 1, vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            LabeledDataset::new(images.clone(), vec![1], Split::Test),
            Err(Error::CountMismatch { .. })
        ));
        assert!(LabeledDataset::new(images, vec![1, 10], Split::Test).is_err());
    }
}
