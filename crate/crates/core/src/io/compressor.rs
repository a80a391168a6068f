//! `CCMP` files: any fitted compressor.
//!
//! ```text
//! "CCMP" | version u16 | method u8 | stride u32 | seed u64 | m u32 | n u32
//! | state tag u8 | state payload | CRC-32
//! ```
//! State payloads: none; filter (`size u32`, values); PCA (`s u32`,
//! `s × mn` components, `mn` mean, `s` singular values); circulant (the
//! body of a `CPRJ` file).

use std::path::Path;

use super::bytes::{container_header, open_container, read_file, write_exclusive, ByteReader};
use super::projection::{read_projection_body, write_projection_body, PROJECTION_MAGIC};
use crate::compressors::{CompressorSpec, CompressorState, Kernel, Method};
use crate::error::{Error, Result};
use crate::linalg::RealMatrix;
use crate::pca::PcaProjection;
use crate::subsample::infer_stride;

pub const COMPRESSOR_MAGIC: &[u8; 4] = b"CCMP";
pub const COMPRESSOR_VERSION: u16 = 1;
const WHAT: &str = "compressor file";

fn malformed(detail: impl Into<String>) -> Error {
    Error::Malformed {
        what: WHAT,
        detail: detail.into(),
    }
}

pub fn encode_compressor(c: &CompressorSpec) -> Vec<u8> {
    let mut w = container_header(COMPRESSOR_MAGIC, COMPRESSOR_VERSION);
    w.u8(c.method.code());
    w.u32(c.stride);
    w.u64(c.seed);
    w.u32(c.image_dims.0);
    w.u32(c.image_dims.1);
    match &c.state {
        CompressorState::None => w.u8(0),
        CompressorState::Filter(k) => {
            w.u8(1);
            w.u32(k.size());
            w.f64s(k.values());
        }
        CompressorState::Pca(p) => {
            w.u8(2);
            w.u32(p.s());
            // nalgebra storage is column-major; write rows.
            for row in p.components().row_iter() {
                for &v in row.iter() {
                    w.f64(v);
                }
            }
            w.f64s(p.mean());
            w.f64s(p.singular_values());
        }
        CompressorState::Circulant(p) => {
            w.u8(3);
            write_projection_body(&mut w, p);
        }
    }
    w.finish()
}

pub fn decode_compressor(bytes: &[u8]) -> Result<CompressorSpec> {
    let body = open_container(bytes, COMPRESSOR_MAGIC, COMPRESSOR_VERSION, WHAT)?;
    let mut r = ByteReader::new(body, WHAT);
    let code = r.u8()?;
    let method = Method::from_code(code).ok_or_else(|| malformed(format!("method code {code}")))?;
    let stride = r.count("stride")?;
    let seed = r.u64()?;
    let m = r.count("image rows")?;
    let n = r.count("image columns")?;
    let mn = m
        .checked_mul(n)
        .filter(|&v| v <= crate::linalg::MAX_DENSE_SIZE)
        .ok_or_else(|| malformed(format!("image size {m}x{n}")))?;
    let state = match r.u8()? {
        0 => CompressorState::None,
        1 => {
            let size = r.count("filter size")?;
            let values = r.f64s(size.saturating_mul(size))?;
            CompressorState::Filter(Kernel::new(size, values).map_err(|e| malformed(e.to_string()))?)
        }
        2 => {
            let s = r.count("components")?;
            if s > mn {
                return Err(malformed(format!("{s} components for {mn} pixels")));
            }
            let components = RealMatrix::from_row_slice(s, mn, &r.f64s(s * mn)?);
            let mean = r.f64s(mn)?;
            let sv = r.f64s(s)?;
            CompressorState::Pca(
                PcaProjection::from_parts(m, n, components, mean, sv)
                    .map_err(|e| malformed(e.to_string()))?,
            )
        }
        3 => CompressorState::Circulant(read_projection_body(&mut r)?),
        t => return Err(malformed(format!("unknown state tag {t}"))),
    };
    r.finish()?;
    let spec = CompressorSpec {
        method,
        stride,
        seed,
        image_dims: (m, n),
        state,
    };
    validate(&spec)?;
    Ok(spec)
}

fn validate(spec: &CompressorSpec) -> Result<()> {
    let (m, n) = spec.image_dims;
    if spec.stride == 0 || spec.stride > m.min(n) {
        return Err(malformed(format!("stride {}", spec.stride)));
    }
    let (gm, gn) = spec.output_dims();
    let ok = match (&spec.state, spec.method) {
        (CompressorState::None, Method::Downsample) => true,
        (CompressorState::Filter(_), Method::RandomConv | Method::Pnn) => true,
        (CompressorState::Pca(p), Method::Pca) => p.s() == gm * gn && p.image_dims() == (m, n),
        (CompressorState::Circulant(p), Method::Circulant) => {
            p.output_grid() == (gm, gn) && p.image_dims() == (m, n)
        }
        _ => false,
    };
    if !ok {
        return Err(malformed(format!("state does not fit method {}", spec.method)));
    }
    Ok(())
}

pub fn save_compressor(c: &CompressorSpec, path: &Path) -> Result<()> {
    write_exclusive(path, &encode_compressor(c))
}

/// Reads either a `CCMP` file or a bare `CPRJ` projection, which is taken
/// as a circulant compressor on its stride grid.
pub fn load_compressor(path: &Path) -> Result<CompressorSpec> {
    let bytes = read_file(path)?;
    if bytes.starts_with(PROJECTION_MAGIC) {
        let p = super::projection::decode_projection(&bytes)?;
        let (m, n) = p.image_dims();
        let stride = infer_stride(m, n, p.sampler().indices()).ok_or_else(|| Error::Malformed {
            what: "projection file",
            detail: "sampler is not a stride grid".into(),
        })?;
        return Ok(CompressorSpec {
            method: Method::Circulant,
            stride,
            seed: 0,
            image_dims: (m, n),
            state: CompressorState::Circulant(p),
        });
    }
    decode_compressor(&bytes)
}
