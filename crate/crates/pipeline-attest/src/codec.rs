//! Canonical binary serialization for proof objects.
//!
//! Wire rules: fixed-width integers are little-endian; variable-length
//! byte strings carry a 4-byte little-endian length prefix; sequences a
//! 4-byte count. Field order is fixed per type and decoding rejects
//! trailing bytes, so every proof has exactly one byte representation.

use crate::commit::Digest;
use crate::field::{FieldElement, FixedPoint};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("unexpected end of input at offset {0}")]
    UnexpectedEof(usize),
    #[error("trailing bytes after decode: {0} left")]
    TrailingBytes(usize),
    #[error("invalid encoding: {0}")]
    Invalid(&'static str),
    #[error("length prefix too large: {0}")]
    LengthOverflow(u32),
}

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Writer { buf: Vec::new() }
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_field(&mut self, v: FieldElement) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_fixed(&mut self, v: FixedPoint) {
        self.put_field(v.raw());
    }

    pub fn put_digest(&mut self, d: &Digest) {
        self.buf.extend_from_slice(d.as_bytes());
    }

    pub fn put_fixed_bytes(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn put_bytes(&mut self, bytes: &[u8]) {
        self.put_u32(bytes.len() as u32);
        self.buf.extend_from_slice(bytes);
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.pos + n > self.data.len() {
            return Err(CodecError::UnexpectedEof(self.pos));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn get_u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn get_u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn get_u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn get_field(&mut self) -> Result<FieldElement, CodecError> {
        let bytes: [u8; 8] = self.take(8)?.try_into().unwrap();
        FieldElement::from_le_bytes(bytes).map_err(|_| CodecError::Invalid("field element"))
    }

    pub fn get_fixed(&mut self) -> Result<FixedPoint, CodecError> {
        Ok(FixedPoint::from_raw(self.get_field()?))
    }

    pub fn get_digest(&mut self) -> Result<Digest, CodecError> {
        let bytes: [u8; 32] = self.take(32)?.try_into().unwrap();
        Ok(Digest::new(bytes))
    }

    pub fn get_fixed_bytes<const N: usize>(&mut self) -> Result<[u8; N], CodecError> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    pub fn get_bytes(&mut self) -> Result<Vec<u8>, CodecError> {
        let len = self.get_u32()?;
        if len as usize > self.data.len() {
            return Err(CodecError::LengthOverflow(len));
        }
        Ok(self.take(len as usize)?.to_vec())
    }

    /// Reads a sequence count, sanity-bounded by the remaining input.
    pub fn get_count(&mut self) -> Result<usize, CodecError> {
        let n = self.get_u32()? as usize;
        if n > self.data.len() {
            return Err(CodecError::LengthOverflow(n as u32));
        }
        Ok(n)
    }

    pub fn finish(self) -> Result<(), CodecError> {
        if self.pos != self.data.len() {
            return Err(CodecError::TrailingBytes(self.data.len() - self.pos));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_primitives() {
        let mut w = Writer::new();
        w.put_u8(7);
        w.put_u32(0xdead_beef);
        w.put_u64(u64::MAX);
        w.put_field(FieldElement::new(12345));
        w.put_bytes(b"hello");
        let buf = w.finish();

        let mut r = Reader::new(&buf);
        assert_eq!(r.get_u8().unwrap(), 7);
        assert_eq!(r.get_u32().unwrap(), 0xdead_beef);
        assert_eq!(r.get_u64().unwrap(), u64::MAX);
        assert_eq!(r.get_field().unwrap(), FieldElement::new(12345));
        assert_eq!(r.get_bytes().unwrap(), b"hello");
        r.finish().unwrap();
    }

    #[test]
    fn rejects_truncation_and_trailing() {
        let mut w = Writer::new();
        w.put_u64(1);
        let buf = w.finish();

        let mut r = Reader::new(&buf[..4]);
        assert!(r.get_u64().is_err());

        let mut r = Reader::new(&buf);
        r.get_u32().unwrap();
        assert!(matches!(r.finish(), Err(CodecError::TrailingBytes(4))));
    }

    #[test]
    fn rejects_noncanonical_field() {
        let buf = u64::MAX.to_le_bytes();
        let mut r = Reader::new(&buf);
        assert!(r.get_field().is_err());
    }
}
