use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Largest element count any header may declare.
pub const MAX_DECLARED: u64 = 10_000_000;

#[derive(Default)]
pub(crate) struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u16(&mut self, v: u16) {
        self.bytes(&v.to_le_bytes());
    }

    pub fn u32(&mut self, v: usize) {
        self.bytes(&u32::try_from(v).expect("value fits in u32").to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }

    pub fn f64s(&mut self, vs: &[f64]) {
        self.buf.reserve(vs.len() * 8);
        for &v in vs {
            self.f64(v);
        }
    }

    /// Appends a CRC-32 of everything written so far.
    pub fn finish(mut self) -> Vec<u8> {
        let crc = crc32fast::hash(&self.buf);
        self.buf.extend_from_slice(&crc.to_le_bytes());
        self.buf
    }
}

pub(crate) struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> ByteReader<'a> {
    pub fn new(buf: &'a [u8], what: &'static str) -> Self {
        Self { buf, pos: 0, what }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let available = self.buf.len() - self.pos;
        if n > available {
            return Err(Error::Truncated {
                what: self.what,
                needed: n,
                available,
            });
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    /// A count field, refused when above [`MAX_DECLARED`].
    pub fn count(&mut self, field: &'static str) -> Result<usize> {
        let v = self.u32()?;
        check_declared(field, v as u64)?;
        Ok(v)
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| self.overflow())?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn overflow(&self) -> Error {
        Error::Malformed {
            what: self.what,
            detail: "size overflow".into(),
        }
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Malformed {
                what: self.what,
                detail: format!("{} trailing bytes", self.buf.len() - self.pos),
            });
        }
        Ok(())
    }
}

pub(crate) fn check_declared(what: &'static str, declared: u64) -> Result<()> {
    if declared > MAX_DECLARED {
        return Err(Error::HostileHeader {
            what,
            declared,
            limit: MAX_DECLARED,
        });
    }
    Ok(())
}

/// Checks magic, version and trailing CRC; returns the body between the
/// version field and the checksum.
pub(crate) fn open_container<'a>(
    bytes: &'a [u8],
    magic: &[u8; 4],
    version: u16,
    what: &'static str,
) -> Result<&'a [u8]> {
    let mut r = ByteReader::new(bytes, what);
    let found = r.take(4)?;
    if found != magic {
        return Err(Error::BadMagic {
            what,
            expected: u32::from_be_bytes(*magic),
            found: u32::from_be_bytes(found.try_into().unwrap()),
        });
    }
    let v = r.u16()?;
    if v != version {
        return Err(Error::VersionMismatch {
            what,
            expected: version,
            found: v,
        });
    }
    if bytes.len() < 10 {
        return Err(Error::Truncated {
            what,
            needed: 10,
            available: bytes.len(),
        });
    }
    let (content, crc) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(crc.try_into().unwrap());
    let computed = crc32fast::hash(content);
    if stored != computed {
        return Err(Error::ChecksumMismatch {
            what,
            stored,
            computed,
        });
    }
    Ok(&content[6..])
}

pub(crate) fn container_header(magic: &[u8; 4], version: u16) -> ByteWriter {
    let mut w = ByteWriter::new();
    w.bytes(magic);
    w.u16(version);
    w
}

/// Writes through a sibling temporary file created exclusively, then renames
/// it into place. A second concurrent writer to the same path fails.
pub(crate) fn write_exclusive(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    let mut file = OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(&tmp)
        .map_err(|e| Error::io(&tmp, e))?;
    let result = file
        .write_all(bytes)
        .and_then(|_| file.sync_all())
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}
