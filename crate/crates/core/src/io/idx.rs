//! IDX image/label files as distributed for MNIST and Fashion-MNIST,
//! optionally gzip-compressed.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use super::bytes::check_declared;
use crate::dataset::{ImageSet, LabeledDataset, Split};
use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

fn open(path: &Path) -> Result<Box<dyn Read>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut sniff = [0u8; 2];
    let peeked = {
        use std::io::BufRead;
        let buf = reader.fill_buf().map_err(|e| Error::io(path, e))?;
        let n = buf.len().min(2);
        sniff[..n].copy_from_slice(&buf[..n]);
        n
    };
    if peeked == 2 && sniff == [0x1f, 0x8b] {
        Ok(Box::new(GzDecoder::new(reader)))
    } else {
        Ok(Box::new(reader))
    }
}

fn read_exact(r: &mut dyn Read, buf: &mut [u8], what: &'static str, path: &Path) -> Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => {
                return Err(Error::Truncated {
                    what,
                    needed: buf.len(),
                    available: filled,
                })
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(Error::io(path, e)),
        }
    }
    Ok(())
}

fn read_u32(r: &mut dyn Read, what: &'static str, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what, path)?;
    Ok(u32::from_be_bytes(b))
}

pub fn read_idx_images(path: &Path) -> Result<ImageSet> {
    let what = "IDX image file";
    let mut r = open(path)?;
    let magic = read_u32(&mut *r, what, path)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::BadMagic {
            what,
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = read_u32(&mut *r, what, path)? as u64;
    let rows = read_u32(&mut *r, what, path)? as usize;
    let cols = read_u32(&mut *r, what, path)? as usize;
    check_declared("IDX image", count)?;
    if rows == 0 || cols == 0 || rows * cols > crate::linalg::MAX_DENSE_SIZE {
        return Err(Error::Malformed {
            what,
            detail: format!("unsupported image size {rows}x{cols}"),
        });
    }
    let mut raw = vec![0u8; count as usize * rows * cols];
    read_exact(&mut *r, &mut raw, what, path)?;
    let pixels = raw.into_iter().map(|b| b as f64 / 255.0).collect();
    ImageSet::new(rows, cols, pixels)
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let what = "IDX label file";
    let mut r = open(path)?;
    let magic = read_u32(&mut *r, what, path)?;
    if magic != LABEL_MAGIC {
        return Err(Error::BadMagic {
            what,
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let count = read_u32(&mut *r, what, path)? as u64;
    check_declared("IDX label", count)?;
    let mut labels = vec![0u8; count as usize];
    read_exact(&mut *r, &mut labels, what, path)?;
    Ok(labels)
}

fn split_from_name(path: &Path) -> Split {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    if name.contains("t10k") || name.contains("test") {
        Split::Test
    } else {
        Split::Train
    }
}

/// Loads an image file and its label file. Pixels are scaled to `[0, 1]`.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<LabeledDataset> {
    let images = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    if images.len() != labels.len() {
        return Err(Error::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    LabeledDataset::new(images, labels, split_from_name(images_path))
}

fn find_file(dir: &Path, stem: &str) -> Result<PathBuf> {
    let candidates = [
        format!("{stem}"),
        format!("{stem}.gz"),
        stem.replacen("-idx", ".idx", 1),
        format!("{}.gz", stem.replacen("-idx", ".idx", 1)),
    ];
    candidates
        .iter()
        .map(|c| dir.join(c))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            Error::io(
                dir.join(stem),
                std::io::Error::new(std::io::ErrorKind::NotFound, "IDX file not found"),
            )
        })
}

/// Loads the standard file pair (`train-*` or `t10k-*`) from a directory.
pub fn load_mnist_dir(dir: &Path, split: Split) -> Result<LabeledDataset> {
    let prefix = match split {
        Split::Train => "train",
        Split::Test => "t10k",
    };
    let images = find_file(dir, &format!("{prefix}-images-idx3-ubyte"))?;
    let labels = find_file(dir, &format!("{prefix}-labels-idx1-ubyte"))?;
    let mut data = load_idx(&images, &labels)?;
    data.split = split;
    Ok(data)
}

/// Serializes images (quantized to bytes) and labels in IDX layout.
pub fn encode_idx(images: &ImageSet, labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut img = Vec::with_capacity(16 + images.pixels().len());
    img.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    img.extend_from_slice(&(images.len() as u32).to_be_bytes());
    img.extend_from_slice(&(images.rows() as u32).to_be_bytes());
    img.extend_from_slice(&(images.cols() as u32).to_be_bytes());
    img.extend(
        images
            .pixels()
            .iter()
            .map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    let mut lab = Vec::with_capacity(8 + labels.len());
    lab.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    lab.extend_from_slice(labels);
    (img, lab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, bytes: &[u8]) -> PathBuf {
        let p = dir.join(name);
        File::create(&p).unwrap().write_all(bytes).unwrap();
        p
    }

    fn fixture() -> (ImageSet, Vec<u8>) {
        let pixels: Vec<f64> = (0..2 * 3 * 2).map(|i| (i * 20) as f64 / 255.0).collect();
        (ImageSet::new(3, 2, pixels).unwrap(), vec![7, 1])
    }

    #[test]
    fn two_image_fixture_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = fixture();
        let (img, lab) = encode_idx(&images, &labels);
        let ip = write(dir.path(), "train-images-idx3-ubyte", &img);
        let lp = write(dir.path(), "train-labels-idx1-ubyte", &lab);
        let data = load_idx(&ip, &lp).unwrap();
        assert_eq!(data.images, images);
        assert_eq!(data.labels, labels);
        assert_eq!(data.split, Split::Train);
    }

    #[test]
    fn gzip_is_sniffed() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = fixture();
        let (img, lab) = encode_idx(&images, &labels);
        let gz = |b: &[u8]| {
            let mut e = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
            e.write_all(b).unwrap();
            e.finish().unwrap()
        };
        write(dir.path(), "t10k-images-idx3-ubyte.gz", &gz(&img));
        write(dir.path(), "t10k-labels-idx1-ubyte.gz", &gz(&lab));
        let data = load_mnist_dir(dir.path(), Split::Test).unwrap();
        assert_eq!(data.images, images);
        assert_eq!(data.split, Split::Test);
    }

    #[test]
    fn distinct_errors() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = fixture();
        let (img, lab) = encode_idx(&images, &labels);
        let ip = write(dir.path(), "i", &img);
        let lp = write(dir.path(), "l", &lab);

        let (_, short) = encode_idx(&images, &labels[..1]);
        let sp = write(dir.path(), "short", &short);
        assert!(matches!(load_idx(&ip, &sp), Err(Error::CountMismatch { images: 2, labels: 1 })));

        assert!(matches!(load_idx(&lp, &lp), Err(Error::BadMagic { .. })));
        assert!(matches!(load_idx(&ip, &ip), Err(Error::BadMagic { .. })));

        let tp = write(dir.path(), "trunc", &img[..img.len() - 1]);
        assert!(matches!(load_idx(&tp, &lp), Err(Error::Truncated { .. })));

        let mut hostile = img.clone();
        hostile[4..8].copy_from_slice(&u32::MAX.to_be_bytes());
        let hp = write(dir.path(), "hostile", &hostile);
        assert!(matches!(load_idx(&hp, &lp), Err(Error::HostileHeader { .. })));

        assert!(matches!(load_idx(&dir.path().join("missing"), &lp), Err(Error::Io { .. })));
    }
}
