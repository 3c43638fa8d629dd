//! The bundled worked-example corpus.
//!
//! The corpus file is plain text: blocks separated by `%%%` lines, each
//! block holding `@key value` metadata lines followed by one raw request.
//! Consecutive blocks sharing an `@id` form one multi-request entry (the
//! brute-force example spans four requests). `#` lines among the metadata
//! are comments.
//!
//! Two published vectors are misprints; those entries carry the printed
//! text verbatim in `@vector` plus a flagged `@corrected` reading. The
//! correction is recorded, never silently applied.

use std::collections::BTreeSet;
use std::path::Path;

use wat_core::codec::parse_text;

/// One worked example: raw request(s), the printed vector, and the
/// corrected reading when the printed one is a known misprint.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: u32,
    pub requests: Vec<String>,
    /// Vector text as printed, verbatim. May be malformed for errata.
    pub published_vector: String,
    /// Corrected reading; present exactly when `erratum_note` is.
    pub corrected_vector: Option<String>,
    pub erratum_note: Option<String>,
    pub cve: Option<String>,
}

impl CorpusEntry {
    pub fn is_erratum(&self) -> bool {
        self.erratum_note.is_some()
    }

    /// The vector classification must reproduce: the corrected reading
    /// for errata, the published text otherwise.
    pub fn expected_vector(&self) -> &str {
        self.corrected_vector.as_deref().unwrap_or(&self.published_vector)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read corpus file: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus block {block}: {reason}")]
    Malformed { block: usize, reason: String },
}

struct Block {
    id: u32,
    vector: Option<String>,
    corrected: Option<String>,
    erratum: Option<String>,
    cve: Option<String>,
    raw: String,
}

fn parse_block(text: &str, block_no: usize) -> Result<Block, CorpusError> {
    let fail = |reason: String| CorpusError::Malformed { block: block_no, reason };
    let mut id = None;
    let mut vector = None;
    let mut corrected = None;
    let mut erratum = None;
    let mut cve = None;
    let mut raw_lines: Vec<&str> = Vec::new();
    let mut in_meta = true;

    for line in text.lines() {
        if in_meta {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(meta) = trimmed.strip_prefix('@') {
                let (key, value) = meta
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| fail(format!("metadata line without value: {line:?}")))?;
                let value = value.trim().to_string();
                match key {
                    "id" => {
                        id = Some(value.parse::<u32>().map_err(|_| {
                            fail(format!("@id wants an integer, got {value:?}"))
                        })?)
                    }
                    "vector" => vector = Some(value),
                    "corrected" => corrected = Some(value),
                    "erratum" => erratum = Some(value),
                    "cve" => cve = Some(value),
                    other => return Err(fail(format!("unknown metadata key @{other}"))),
                }
                continue;
            }
            in_meta = false;
        }
        raw_lines.push(line);
    }

    while raw_lines.last().is_some_and(|l| l.trim().is_empty()) {
        raw_lines.pop();
    }
    if raw_lines.is_empty() {
        return Err(fail("block has no raw request".to_string()));
    }
    Ok(Block {
        id: id.ok_or_else(|| fail("block has no @id".to_string()))?,
        vector,
        corrected,
        erratum,
        cve,
        raw: raw_lines.join("\n"),
    })
}

/// Parses corpus text into entries, enforcing the corpus invariants.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, CorpusError> {
    let mut entries: Vec<CorpusEntry> = Vec::new();
    let mut closed_ids: BTreeSet<u32> = BTreeSet::new();

    for (i, chunk) in split_blocks(text).into_iter().enumerate() {
        let block_no = i + 1;
        let block = parse_block(&chunk, block_no)?;
        let fail = |reason: String| CorpusError::Malformed { block: block_no, reason };

        match entries.last_mut() {
            Some(entry) if entry.id == block.id => {
                // Continuation of a multi-request entry.
                if block.vector.is_some() || block.corrected.is_some() || block.cve.is_some() {
                    return Err(fail(format!(
                        "continuation block for entry {} repeats metadata",
                        block.id
                    )));
                }
                entry.requests.push(block.raw);
            }
            _ => {
                if !closed_ids.insert(block.id) {
                    return Err(fail(format!("duplicate entry id {}", block.id)));
                }
                if !(1..=20).contains(&block.id) {
                    return Err(fail(format!("entry id {} outside 1..=20", block.id)));
                }
                entries.push(CorpusEntry {
                    id: block.id,
                    requests: vec![block.raw],
                    published_vector: block
                        .vector
                        .ok_or_else(|| fail(format!("entry {} has no @vector", block.id)))?,
                    corrected_vector: block.corrected,
                    erratum_note: block.erratum,
                    cve: block.cve,
                });
            }
        }
    }

    for entry in &entries {
        let fail = |reason: String| CorpusError::Malformed {
            block: entry.id as usize,
            reason,
        };
        if entry.corrected_vector.is_some() != entry.erratum_note.is_some() {
            return Err(fail(format!(
                "entry {}: corrected vector and erratum note must come together",
                entry.id
            )));
        }
        if let Err(e) = parse_text(entry.expected_vector()) {
            return Err(fail(format!(
                "entry {}: expected vector does not parse: {e}",
                entry.id
            )));
        }
        if entry.corrected_vector.is_none() {
            // Non-errata must publish a well-formed vector.
            if let Err(e) = parse_text(&entry.published_vector) {
                return Err(fail(format!(
                    "entry {}: published vector does not parse and no correction is recorded: {e}",
                    entry.id
                )));
            }
        }
    }
    Ok(entries)
}

fn split_blocks(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim_end() == "%%%" {
            blocks.push(std::mem::take(&mut current));
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    blocks.push(current);
    blocks.into_iter().filter(|b| !b.trim().is_empty()).collect()
}

/// Loads a corpus file from disk.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<CorpusEntry>, CorpusError> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# comment
@id 1
@cve CVE-2000-0169
@vector {0, X, 1, 9, 0, 01, 1, X, 0}
GET /x
%%%
@id 2
@vector {0, 3, 4, 7, 20, 0, 1, X}
@corrected {0, 3, 4, 7, 1, 20, 0, 1, X}
@erratum published vector has eight fields
SEARCH /
body
%%%
@id 3
@vector {1, X, 0, 6, 0, 01, 0, 0, 0}
GET /login?u=f&p=a
%%%
@id 3
GET /login?u=f&p=b
";

    #[test]
    fn parses_entries_and_groups_continuations() {
        let entries = parse_corpus(SAMPLE).unwrap();
        assert_eq!(entries.len(), 3);
        assert_eq!(entries[0].cve.as_deref(), Some("CVE-2000-0169"));
        assert!(!entries[0].is_erratum());
        assert_eq!(entries[0].requests, vec!["GET /x".to_string()]);

        assert!(entries[1].is_erratum());
        assert_eq!(entries[1].expected_vector(), "{0, 3, 4, 7, 1, 20, 0, 1, X}");
        assert_eq!(entries[1].requests[0], "SEARCH /\nbody");

        assert_eq!(entries[2].requests.len(), 2);
    }

    #[test]
    fn erratum_requires_both_fields() {
        let text = "@id 1\n@vector {0, X}\n@corrected {0, X, 2, 0, 0, 01, 0, X, X}\nGET /x\n";
        assert!(parse_corpus(text).is_err());
    }

    #[test]
    fn unparseable_published_vector_needs_correction() {
        let text = "@id 1\n@vector {0, X}\nGET /x\n";
        let err = parse_corpus(text).unwrap_err();
        assert!(err.to_string().contains("does not parse"));
    }

    #[test]
    fn duplicate_nonconsecutive_ids_rejected() {
        let text = "\
@id 1
@vector {0, X, 2, 0, 0, 01, 0, X, X}
GET /a
%%%
@id 2
@vector {0, X, 2, 0, 0, 01, 0, X, X}
GET /b
%%%
@id 1
GET /c
";
        assert!(parse_corpus(text).is_err());
    }
}
