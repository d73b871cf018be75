//! Small byte-level codec shared by the key-file and store formats.
//!
//! All integers are little-endian fixed width; variable-length fields are
//! `u32` length-prefixed.

use thiserror::Error;

use crate::group::{CodecError, G1Elem, G2Elem, GtElem, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("truncated input: needed {needed} more bytes")]
    Truncated { needed: usize },
    #[error("trailing data: {remaining} unread bytes")]
    TrailingData { remaining: usize },
    #[error("length field overflows the input")]
    LengthOverflow,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

pub fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    put_u32(out, bytes.len() as u32);
    out.extend_from_slice(bytes);
}

/// Cursor over an input slice with strict end-of-input accounting.
pub struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() < n {
            return Err(WireError::Truncated {
                needed: n - self.buf.len(),
            });
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, WireError> {
        let raw = self.take(4)?;
        Ok(u32::from_le_bytes(raw.try_into().expect("4-byte slice")))
    }

    /// Reads a `u32` length-prefixed field.
    pub fn bytes(&mut self) -> Result<&'a [u8], WireError> {
        let len = self.u32()? as usize;
        if len > self.buf.len() {
            return Err(WireError::LengthOverflow);
        }
        self.take(len)
    }

    pub fn remaining(&self) -> usize {
        self.buf.len()
    }

    pub fn expect_end(&self) -> Result<(), WireError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(WireError::TrailingData {
                remaining: self.buf.len(),
            })
        }
    }
}

/// Canonical byte encoding of a value, as used inside key files, stores and
/// ciphertext records.
pub trait WireCodec: Sized {
    fn write_wire(&self, out: &mut Vec<u8>);
    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError>;

    fn to_wire(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_wire(&mut out);
        out
    }

    fn from_wire(bytes: &[u8]) -> Result<Self, WireError> {
        let mut reader = Reader::new(bytes);
        let value = Self::read_wire(&mut reader)?;
        reader.expect_end()?;
        Ok(value)
    }
}

impl WireCodec for Scalar {
    fn write_wire(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_bytes());
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(Scalar::from_bytes(reader.take(crate::group::SCALAR_BYTES)?)?)
    }
}

impl WireCodec for G1Elem {
    fn write_wire(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_bytes());
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(G1Elem::from_bytes(reader.take(crate::group::G1_BYTES)?)?)
    }
}

impl WireCodec for G2Elem {
    fn write_wire(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_bytes());
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(G2Elem::from_bytes(reader.take(crate::group::G2_BYTES)?)?)
    }
}

impl WireCodec for GtElem {
    fn write_wire(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_bytes());
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(GtElem::from_bytes(reader.take(crate::group::GT_BYTES)?)?)
    }
}
