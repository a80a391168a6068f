//! `CPRJ` files: a subsampled unitary BCCB projection.
//!
//! ```text
//! "CPRJ" | version u16 | m u32 | n u32 | s u32
//! | mn × (re f64, im f64) spectrum | s × u64 sampler indices | CRC-32
//! ```
//! All integers little-endian; the CRC covers every preceding byte.

use std::path::Path;

use num_complex::Complex64;

use super::bytes::{container_header, open_container, read_file, write_exclusive, ByteReader, ByteWriter};
use crate::bccb::UnitaryBccb;
use crate::error::{Error, Result};
use crate::subsample::{infer_grid, DownsamplingOperator, SubsampledProjection};

pub const PROJECTION_MAGIC: &[u8; 4] = b"CPRJ";
pub const PROJECTION_VERSION: u16 = 1;
const WHAT: &str = "projection file";

/// Size in bytes of a stored projection.
pub fn projection_file_size(m: usize, n: usize, s: usize) -> usize {
    4 + 2 + 3 * 4 + 16 * m * n + 8 * s + 4
}

pub(crate) fn write_projection_body(w: &mut ByteWriter, p: &SubsampledProjection) {
    let base = p.base();
    w.u32(base.m());
    w.u32(base.n());
    w.u32(p.s());
    for c in base.spectrum() {
        w.f64(c.re);
        w.f64(c.im);
    }
    for &i in p.sampler().indices() {
        w.u64(i as u64);
    }
}

pub(crate) fn read_projection_body(r: &mut ByteReader<'_>) -> Result<SubsampledProjection> {
    let m = r.count("projection rows")?;
    let n = r.count("projection columns")?;
    let s = r.count("projection samples")?;
    let mn = m
        .checked_mul(n)
        .filter(|&mn| mn as u64 <= super::bytes::MAX_DECLARED)
        .ok_or(Error::HostileHeader {
            what: "projection size",
            declared: m as u64 * n as u64,
            limit: super::bytes::MAX_DECLARED,
        })?;
    let raw = r.f64s(2 * mn)?;
    let spectrum: Vec<Complex64> = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
    let mut indices = Vec::with_capacity(s);
    for _ in 0..s {
        let i = r.u64()?;
        indices.push(usize::try_from(i).map_err(|_| malformed(format!("index {i}")))?);
    }
    let base = UnitaryBccb::from_unit_spectrum(spectrum, m, n).map_err(|e| malformed(e.to_string()))?;
    let grid = infer_grid(m, n, &indices);
    let sampler =
        DownsamplingOperator::with_grid(mn, indices, grid).map_err(|e| malformed(e.to_string()))?;
    SubsampledProjection::new(base, sampler).map_err(|e| malformed(e.to_string()))
}

fn malformed(detail: String) -> Error {
    Error::Malformed { what: WHAT, detail }
}

pub fn encode_projection(p: &SubsampledProjection) -> Vec<u8> {
    let mut w = container_header(PROJECTION_MAGIC, PROJECTION_VERSION);
    write_projection_body(&mut w, p);
    w.finish()
}

pub fn decode_projection(bytes: &[u8]) -> Result<SubsampledProjection> {
    let body = open_container(bytes, PROJECTION_MAGIC, PROJECTION_VERSION, WHAT)?;
    let mut r = ByteReader::new(body, WHAT);
    let p = read_projection_body(&mut r)?;
    r.finish()?;
    Ok(p)
}

pub fn save_projection(p: &SubsampledProjection, path: &Path) -> Result<()> {
    write_exclusive(path, &encode_projection(p))
}

pub fn load_projection(path: &Path) -> Result<SubsampledProjection> {
    decode_projection(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subsample::grid_sampler;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_projection(m: usize, n: usize, stride: usize, seed: u64) -> SubsampledProjection {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = crate::linalg::RealMatrix::from_fn(m * n, m * n, |_, _| rng.gen_range(-1.0..1.0));
        let base = crate::bccb::nearest_unitary_bccb(&w, m, n).unwrap();
        SubsampledProjection::new(base, grid_sampler(m, n, stride).unwrap()).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let p = random_projection(4, 5, 2, 1);
        let bytes = encode_projection(&p);
        assert_eq!(bytes.len(), projection_file_size(4, 5, 6));
        let q = decode_projection(&bytes).unwrap();
        assert_eq!(p, q);
        assert_eq!(q.output_grid(), (2, 3));
        let image: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let a = p.compress(&image).unwrap();
        let b = q.compress(&image).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn corruption_is_detected() {
        let mut bytes = encode_projection(&random_projection(3, 3, 2, 2));
        let k = bytes.len() / 2;
        bytes[k] ^= 0x40;
        assert!(matches!(decode_projection(&bytes), Err(Error::ChecksumMismatch { .. })));

        let mut v2 = encode_projection(&random_projection(3, 3, 2, 2));
        v2[4] = 2;
        assert!(matches!(decode_projection(&v2), Err(Error::VersionMismatch { found: 2, .. })));

        let good = encode_projection(&random_projection(3, 3, 2, 2));
        assert!(matches!(decode_projection(&good[..3]), Err(Error::Truncated { .. })));
        assert!(matches!(decode_projection(b"CCKP\x01\x00\0\0\0\0"), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn concurrent_writer_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.cprj");
        std::fs::write(dir.path().join("p.cprj.partial"), b"busy").unwrap();
        let p = random_projection(3, 3, 1, 3);
        assert!(matches!(save_projection(&p, &path), Err(Error::Io { .. })));
        std::fs::remove_file(dir.path().join("p.cprj.partial")).unwrap();
        save_projection(&p, &path).unwrap();
        assert_eq!(load_projection(&path).unwrap(), p);
    }
}
