use std::collections::HashMap;

use sha2::{Digest, Sha256};

use super::{CodecError, CODE_BASE};

pub const MAX_ENTRIES: usize = 128;
pub const MIN_ENTRY_LEN: usize = 2;
pub const MAX_ENTRY_LEN: usize = 8;
pub const MAGIC: &[u8; 4] = b"SMZ1";

/// Code table: entry `k` is emitted as byte `0x80 + k`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    entries: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, u8>,
}

impl Dictionary {
    pub fn new(entries: Vec<Vec<u8>>) -> Result<Self, CodecError> {
        if entries.len() > MAX_ENTRIES {
            return Err(CodecError::BadDictionary(format!("{} entries exceed {MAX_ENTRIES}", entries.len())));
        }
        let mut lookup = HashMap::with_capacity(entries.len());
        for (k, e) in entries.iter().enumerate() {
            if !(MIN_ENTRY_LEN..=MAX_ENTRY_LEN).contains(&e.len()) {
                return Err(CodecError::BadDictionary(format!("entry {k} has length {}", e.len())));
            }
            if !e.iter().all(|b| (0x20..0x7f).contains(b)) {
                return Err(CodecError::BadDictionary(format!("entry {k} is not printable ASCII")));
            }
            if lookup.insert(e.clone(), CODE_BASE + k as u8).is_some() {
                return Err(CodecError::BadDictionary(format!("entry {k} is a duplicate")));
            }
        }
        Ok(Self { entries, lookup })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Vec<u8>] {
        &self.entries
    }

    pub fn entry(&self, code: u8) -> Option<&[u8]> {
        code.checked_sub(CODE_BASE).and_then(|k| self.entries.get(k as usize)).map(Vec::as_slice)
    }

    /// Longest entry that prefixes `input`, as `(code, length)`.
    pub fn longest_match(&self, input: &[u8]) -> Option<(u8, usize)> {
        let max = input.len().min(MAX_ENTRY_LEN);
        (MIN_ENTRY_LEN..=max).rev().find_map(|len| self.lookup.get(&input[..len]).map(|&c| (c, len)))
    }

    /// `SMZ1`, entry count byte, then `len, bytes` per entry in code order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.entries.iter().map(|e| e.len() + 1).sum::<usize>());
        out.extend_from_slice(MAGIC);
        out.push(self.entries.len() as u8);
        for e in &self.entries {
            out.push(e.len() as u8);
            out.extend_from_slice(e);
        }
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, CodecError> {
        let bad = |m: &str| CodecError::BadDictionary(m.to_string());
        if data.len() < 5 || &data[..4] != MAGIC {
            return Err(bad("missing SMZ1 magic"));
        }
        let count = data[4] as usize;
        let mut entries = Vec::with_capacity(count);
        let mut pos = 5;
        for _ in 0..count {
            let len = *data.get(pos).ok_or_else(|| bad("truncated entry length"))? as usize;
            let bytes = data.get(pos + 1..pos + 1 + len).ok_or_else(|| bad("truncated entry"))?;
            entries.push(bytes.to_vec());
            pos += 1 + len;
        }
        if pos != data.len() {
            return Err(bad("trailing bytes"));
        }
        Self::new(entries)
    }

    pub fn sha256(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }
}
