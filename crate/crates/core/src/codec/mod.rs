//! Per-line dictionary compression for SMILES libraries.
//!
//! Input lines are 7-bit ASCII, so every byte `0x80..=0xFF` is free to act as
//! a code for one dictionary entry (2-8 printable bytes). Each line is encoded
//! on its own by greedy longest match, so any line can be decoded without its
//! neighbours and one dictionary serves every library.

mod dictionary;
mod file;
mod train;

pub use dictionary::{Dictionary, MAX_ENTRIES, MAX_ENTRY_LEN, MIN_ENTRY_LEN};
pub use file::{read_compressed_library, write_compressed_library, MAGIC};
pub use train::train_dictionary;

use thiserror::Error;

pub const CODE_BASE: u8 = 0x80;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("non-ASCII byte {byte:#04x} at offset {offset}")]
    NonAsciiInput { byte: u8, offset: usize },
    #[error("unknown code {byte:#04x} at offset {offset}")]
    UnknownCode { byte: u8, offset: usize },
    #[error("malformed dictionary: {0}")]
    BadDictionary(String),
    #[error("malformed compressed library: {0}")]
    BadContainer(String),
    #[error("compressed library was written with a different dictionary")]
    DictionaryMismatch,
}

fn check_ascii(line: &[u8]) -> Result<(), CodecError> {
    match line.iter().position(|&b| b >= CODE_BASE) {
        Some(offset) => Err(CodecError::NonAsciiInput { byte: line[offset], offset }),
        None => Ok(()),
    }
}

/// Greedy longest-match encoding of one line.
pub fn compress_line(line: &[u8], dict: &Dictionary) -> Result<Vec<u8>, CodecError> {
    check_ascii(line)?;
    let mut out = Vec::with_capacity(line.len());
    let mut i = 0;
    while i < line.len() {
        match dict.longest_match(&line[i..]) {
            Some((code, len)) => {
                out.push(code);
                i += len;
            }
            None => {
                out.push(line[i]);
                i += 1;
            }
        }
    }
    Ok(out)
}

pub fn decompress_line(data: &[u8], dict: &Dictionary) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::with_capacity(data.len() * 2);
    for (offset, &byte) in data.iter().enumerate() {
        if byte < CODE_BASE {
            out.push(byte);
        } else {
            let entry = dict.entry(byte).ok_or(CodecError::UnknownCode { byte, offset })?;
            out.extend_from_slice(entry);
        }
    }
    Ok(out)
}

/// The dictionary shipped with the crate, trained once on a generated
/// drug-like sample that is disjoint from every test and demo library.
pub fn default_dictionary() -> Dictionary {
    Dictionary::from_bytes(include_bytes!("../../data/default.smz")).expect("shipped dictionary is valid")
}
