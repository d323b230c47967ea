//! Greedy n-gram dictionary training.
//!
//! Each round re-encodes the corpus with the entries chosen so far and adds
//! the n-gram (2-8 bytes, printable, inside a literal run) with the largest
//! `frequency * (length - 1)` saving; ties go to the lexicographically
//! smallest n-gram. Frequencies count non-overlapping occurrences scanned left
//! to right. Only lines containing the new entry change encoding, so counts
//! are maintained incrementally.

use std::collections::HashMap;

use super::{check_ascii, compress_line, CodecError, Dictionary, CODE_BASE, MAX_ENTRY_LEN, MIN_ENTRY_LEN};

/// n-gram packed as 7-bit bytes plus length in the low 3 bits.
fn pack(gram: &[u8]) -> u64 {
    let mut k = 0u64;
    for &b in gram {
        k = (k << 7) | u64::from(b);
    }
    (k << 3) | (gram.len() as u64 - 1)
}

fn unpack(key: u64) -> Vec<u8> {
    let len = (key & 7) as usize + 1;
    let mut v = key >> 3;
    let mut out = vec![0u8; len];
    for slot in out.iter_mut().rev() {
        *slot = (v & 0x7f) as u8;
        v >>= 7;
    }
    out
}

fn printable(b: u8) -> bool {
    (0x20..0x7f).contains(&b)
}

/// Non-overlapping n-gram counts over the literal runs of an encoded line.
fn line_counts(encoded: &[u8]) -> HashMap<u64, i64> {
    let mut last_end: HashMap<u64, usize> = HashMap::new();
    let mut counts: HashMap<u64, i64> = HashMap::new();
    let mut p = 0;
    while p < encoded.len() {
        if encoded[p] >= CODE_BASE {
            p += 1;
            continue;
        }
        let run_end = encoded[p..].iter().position(|&b| b >= CODE_BASE).map_or(encoded.len(), |o| p + o);
        for start in p..run_end {
            if !printable(encoded[start]) {
                continue;
            }
            for len in MIN_ENTRY_LEN..=MAX_ENTRY_LEN {
                let end = start + len;
                if end > run_end || !printable(encoded[end - 1]) {
                    break;
                }
                let key = pack(&encoded[start..end]);
                let le = last_end.entry(key).or_insert(0);
                if *le <= start {
                    *le = end;
                    *counts.entry(key).or_insert(0) += 1;
                }
            }
        }
        p = run_end;
    }
    counts
}

fn contains(hay: &[u8], needle: &[u8]) -> bool {
    hay.windows(needle.len()).any(|w| w == needle)
}

pub fn train_dictionary<S: AsRef<[u8]>>(corpus: &[S], max_entries: usize) -> Result<Dictionary, CodecError> {
    for line in corpus {
        check_ascii(line.as_ref())?;
    }
    let max_entries = max_entries.min(super::MAX_ENTRIES);
    let mut entries: Vec<Vec<u8>> = Vec::new();
    let mut dict = Dictionary::default();
    let mut encoded: Vec<Vec<u8>> = corpus.iter().map(|l| l.as_ref().to_vec()).collect();
    let mut totals: HashMap<u64, i64> = HashMap::new();
    for e in &encoded {
        for (k, c) in line_counts(e) {
            *totals.entry(k).or_insert(0) += c;
        }
    }
    while entries.len() < max_entries {
        let mut best: Option<(i64, Vec<u8>, u64)> = None;
        for (&key, &freq) in &totals {
            let len = (key & 7) as i64 + 1;
            let saving = freq * (len - 1);
            if saving <= 0 {
                continue;
            }
            let better = match &best {
                None => true,
                Some((s, gram, _)) => saving > *s || (saving == *s && unpack(key) < *gram),
            };
            if better {
                best = Some((saving, unpack(key), key));
            }
        }
        let Some((_, gram, key)) = best else { break };
        totals.remove(&key);
        entries.push(gram.clone());
        dict = Dictionary::new(entries.clone())?;
        for (raw, enc) in corpus.iter().zip(encoded.iter_mut()) {
            let raw = raw.as_ref();
            if !contains(raw, &gram) {
                continue;
            }
            for (k, c) in line_counts(enc) {
                if let Some(t) = totals.get_mut(&k) {
                    *t -= c;
                }
            }
            *enc = compress_line(raw, &dict)?;
            for (k, c) in line_counts(enc) {
                *totals.entry(k).or_insert(0) += c;
            }
        }
        totals.retain(|_, c| *c > 0);
        // chosen entries can never reappear inside a literal run, but keep
        // them out of the candidate set regardless
        for e in &entries {
            totals.remove(&pack(e));
        }
    }
    Ok(dict)
}
