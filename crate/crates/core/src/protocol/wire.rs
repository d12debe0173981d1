//! Payload encoding helpers.

use super::ProtocolError;
use crate::ahe::{Ciphertext, PublicKey};
use crate::gc::Label;

pub(crate) fn malformed(m: &str) -> ProtocolError {
    ProtocolError::Malformed(m.to_string())
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_be_bytes());
}

pub(crate) fn ciphertexts(cs: &[Ciphertext]) -> Vec<u8> {
    let mut out = Vec::new();
    put_u32(&mut out, cs.len());
    for c in cs {
        c.write_to(&mut out);
    }
    out
}

pub(crate) fn labels(ls: &[Label]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * ls.len());
    for l in ls {
        out.extend_from_slice(&l.to_bytes());
    }
    out
}

pub(crate) fn label_pairs(ls: &[(Label, Label)]) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 * ls.len());
    for (a, b) in ls {
        out.extend_from_slice(&a.to_bytes());
        out.extend_from_slice(&b.to_bytes());
    }
    out
}

/// LSB-first within each byte.
pub(crate) fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

pub(crate) fn unpack_bits(bytes: &[u8], count: usize) -> Result<Vec<bool>, ProtocolError> {
    if bytes.len() != count.div_ceil(8) {
        return Err(malformed("bit vector length"));
    }
    Ok((0..count).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], ProtocolError> {
        if self.buf.len() < n {
            return Err(malformed("truncated payload"));
        }
        let (a, b) = self.buf.split_at(n);
        self.buf = b;
        Ok(a)
    }

    pub fn u32(&mut self) -> Result<usize, ProtocolError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    pub fn label(&mut self) -> Result<Label, ProtocolError> {
        Ok(Label::from_bytes(self.take(16)?)?)
    }

    pub fn labels(&mut self, n: usize) -> Result<Vec<Label>, ProtocolError> {
        (0..n).map(|_| self.label()).collect()
    }

    pub fn label_pairs(&mut self, n: usize) -> Result<Vec<(Label, Label)>, ProtocolError> {
        (0..n).map(|_| Ok((self.label()?, self.label()?))).collect()
    }

    pub fn ciphertexts(&mut self, pk: &PublicKey) -> Result<Vec<Ciphertext>, ProtocolError> {
        let n = self.u32()?;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let (c, rest) = pk.ciphertext_from_bytes(self.buf)?;
            self.buf = rest;
            out.push(c);
        }
        Ok(out)
    }

    pub fn finish(&self) -> Result<(), ProtocolError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(malformed("trailing bytes"))
        }
    }
}
