//! Compressed library container: `SMZC`, SHA-256 of the serialized dictionary,
//! then one `varint length, payload` record per line.

use super::{compress_line, decompress_line, CodecError, Dictionary};

pub const MAGIC: &[u8; 4] = b"SMZC";

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

fn get_varint(data: &[u8], pos: &mut usize) -> Result<u64, CodecError> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *data.get(*pos).ok_or_else(|| CodecError::BadContainer("truncated length".into()))?;
        *pos += 1;
        v |= u64::from(b & 0x7f) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
    Err(CodecError::BadContainer("length varint too long".into()))
}

pub fn write_compressed_library<S: AsRef<[u8]>>(lines: &[S], dict: &Dictionary) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&dict.sha256());
    for line in lines {
        let payload = compress_line(line.as_ref(), dict)?;
        put_varint(&mut out, payload.len() as u64);
        out.extend_from_slice(&payload);
    }
    Ok(out)
}

pub fn read_compressed_library(data: &[u8], dict: &Dictionary) -> Result<Vec<Vec<u8>>, CodecError> {
    if data.len() < 36 || &data[..4] != MAGIC {
        return Err(CodecError::BadContainer("missing SMZC header".into()));
    }
    if data[4..36] != dict.sha256() {
        return Err(CodecError::DictionaryMismatch);
    }
    let mut pos = 36;
    let mut lines = Vec::new();
    while pos < data.len() {
        let len = get_varint(data, &mut pos)? as usize;
        let payload = data
            .get(pos..pos.saturating_add(len))
            .ok_or_else(|| CodecError::BadContainer("truncated payload".into()))?;
        pos += len;
        lines.push(decompress_line(payload, dict)?);
    }
    Ok(lines)
}
