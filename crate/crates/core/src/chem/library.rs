//! Library text format: one `SMILES<TAB>ID` record per line. The ID is
//! optional (auto-assigned `L<line>`); blank and `#` lines are skipped.

use std::collections::HashSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LibraryRecord {
    /// 1-based line number in the source text.
    pub line: usize,
    pub id: String,
    pub smiles: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LibraryError {
    #[error("duplicate ligand id {id:?} on line {line}")]
    DuplicateId { id: String, line: usize },
}

pub fn parse_library(text: &str) -> Result<Vec<LibraryRecord>, LibraryError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let (smiles, id) = match raw.split_once('\t') {
            Some((s, id)) if !id.trim().is_empty() => (s, id.trim().to_string()),
            Some((s, _)) => (s, format!("L{line}")),
            None => (raw, format!("L{line}")),
        };
        if !ids.insert(id.clone()) {
            return Err(LibraryError::DuplicateId { id, line });
        }
        out.push(LibraryRecord { line, id, smiles: smiles.trim().to_string() });
    }
    Ok(out)
}

pub fn format_library<'a>(records: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    let mut s = String::new();
    for (smiles, id) in records {
        s.push_str(smiles);
        s.push('\t');
        s.push_str(id);
        s.push('\n');
    }
    s
}
