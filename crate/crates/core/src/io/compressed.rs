//! `CCDS` files: compressed arrays with labels.
//!
//! ```text
//! "CCDS" | version u16 | method u8 | stride u32 | raw rows u32 | raw cols u32
//! | count u32 | height u32 | width u32 | count × u8 labels | count·height·width × f64 values | CRC-32
//! ```
//! Method `0xff` with zero stride and raw size means the producing
//! compressor is unknown.

use std::path::Path;

use super::bytes::{check_declared, container_header, open_container, read_file, write_exclusive, ByteReader};
use crate::compressors::Method;
use crate::dataset::CompressedDataset;
use crate::error::{Error, Result};

pub const DATASET_MAGIC: &[u8; 4] = b"CCDS";
pub const DATASET_VERSION: u16 = 1;
const WHAT: &str = "compressed dataset file";
const UNKNOWN_METHOD: u8 = 0xff;

/// Compressor that produced a stored dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Origin {
    pub method: Method,
    pub stride: usize,
    /// Image size before compression.
    pub image_dims: (usize, usize),
}

pub fn encode_compressed_dataset(data: &CompressedDataset, origin: Option<Origin>) -> Result<Vec<u8>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut w = container_header(DATASET_MAGIC, DATASET_VERSION);
    match origin {
        Some(o) => {
            w.u8(o.method.code());
            w.u32(o.stride);
            w.u32(o.image_dims.0);
            w.u32(o.image_dims.1);
        }
        None => {
            w.u8(UNKNOWN_METHOD);
            w.u32(0);
            w.u32(0);
            w.u32(0);
        }
    }
    w.u32(data.len());
    w.u32(data.height);
    w.u32(data.width);
    w.bytes(&data.labels);
    w.f64s(&data.values);
    Ok(w.finish())
}

pub fn decode_compressed_dataset(bytes: &[u8]) -> Result<(CompressedDataset, Option<Origin>)> {
    let body = open_container(bytes, DATASET_MAGIC, DATASET_VERSION, WHAT)?;
    let mut r = ByteReader::new(body, WHAT);
    let code = r.u8()?;
    let stride = r.count("stride")?;
    let image_dims = (r.count("raw rows")?, r.count("raw columns")?);
    let origin = match code {
        UNKNOWN_METHOD => None,
        c => Some(Origin {
            method: Method::from_code(c).ok_or_else(|| Error::Malformed {
                what: WHAT,
                detail: format!("method code {c}"),
            })?,
            stride,
            image_dims,
        }),
    };
    let count = r.count("dataset samples")?;
    let height = r.count("dataset height")?;
    let width = r.count("dataset width")?;
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    let total = count as u64 * height as u64 * width as u64;
    check_declared("dataset values", total)?;
    let labels = r.take(count)?.to_vec();
    let values = r.f64s(total as usize)?;
    r.finish()?;
    let data = CompressedDataset::new(height, width, values, labels).map_err(|e| Error::Malformed {
        what: WHAT,
        detail: e.to_string(),
    })?;
    Ok((data, origin))
}

pub fn save_compressed_dataset(
    data: &CompressedDataset,
    origin: Option<Origin>,
    path: &Path,
) -> Result<()> {
    write_exclusive(path, &encode_compressed_dataset(data, origin)?)
}

pub fn load_compressed_dataset(path: &Path) -> Result<(CompressedDataset, Option<Origin>)> {
    decode_compressed_dataset(&read_file(path)?)
}
