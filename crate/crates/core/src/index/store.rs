//! Binary serialization helpers for the index container.
//!
//! Little-endian, length-prefixed, no framing cleverness. The container
//! [`super::IndexBundle`] owns the layout; this module provides the
//! byte-level encoder/decoder with truncation-safe reads that surface
//! `Error::IndexFormat` instead of panicking on corrupt files.

use crate::error::{Error, Result};

/// File signature for index containers.
pub const MAGIC: [u8; 4] = *b"TMRI";
/// Current container layout version.
pub const FORMAT_VERSION: u8 = 1;

pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(&MAGIC);
        buf.push(FORMAT_VERSION);
        Encoder { buf }
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    pub fn u32_slice(&mut self, vs: &[u32]) {
        self.u64(vs.len() as u64);
        for &v in vs {
            self.u32(v);
        }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug)]
pub struct Decoder<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    /// Checks magic and version before handing out a cursor.
    pub fn new(data: &'a [u8]) -> Result<Self> {
        if data.len() < 5 || data[..4] != MAGIC {
            return Err(Error::IndexFormat("not an index container".into()));
        }
        if data[4] != FORMAT_VERSION {
            return Err(Error::IndexFormat(format!(
                "unsupported container version {} (expected {})",
                data[4], FORMAT_VERSION
            )));
        }
        Ok(Decoder { data, pos: 5 })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::IndexFormat("truncated index container".into()));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn str(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::IndexFormat("invalid utf-8 in container".into()))
    }

    pub fn u32_vec(&mut self) -> Result<Vec<u32>> {
        let len = self.u64()? as usize;
        if len > self.data.len() / 4 + 1 {
            return Err(Error::IndexFormat("length field exceeds file size".into()));
        }
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(self.u32()?);
        }
        Ok(out)
    }

    /// True when every byte has been consumed.
    pub fn finished(&self) -> bool {
        self.pos == self.data.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_primitives() {
        let mut e = Encoder::new();
        e.u8(7);
        e.u16(300);
        e.u32(70_000);
        e.u64(1 << 40);
        e.str("héllo");
        e.u32_slice(&[1, 2, 3]);
        let bytes = e.into_bytes();
        let mut d = Decoder::new(&bytes).unwrap();
        assert_eq!(d.u8().unwrap(), 7);
        assert_eq!(d.u16().unwrap(), 300);
        assert_eq!(d.u32().unwrap(), 70_000);
        assert_eq!(d.u64().unwrap(), 1 << 40);
        assert_eq!(d.str().unwrap(), "héllo");
        assert_eq!(d.u32_vec().unwrap(), vec![1, 2, 3]);
        assert!(d.finished());
    }

    #[test]
    fn bad_magic_and_version_are_rejected() {
        assert!(Decoder::new(b"NOPE\x01rest").is_err());
        let mut bytes = Encoder::new().into_bytes();
        bytes[4] = FORMAT_VERSION + 1;
        let err = Decoder::new(&bytes).unwrap_err();
        assert!(err.to_string().contains("unsupported container version"));
    }

    #[test]
    fn truncation_is_an_error_not_a_panic() {
        let mut e = Encoder::new();
        e.u64(42);
        let bytes = e.into_bytes();
        let mut d = Decoder::new(&bytes[..bytes.len() - 1]).unwrap();
        assert!(d.u64().is_err());
    }
}
