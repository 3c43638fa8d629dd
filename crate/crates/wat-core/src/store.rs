//! Append-only vector store.
//!
//! File layout: a 5-byte header (`WAVX` magic plus a version byte), then
//! records back to back. Each record is a little-endian u64 timestamp, a
//! length-prefixed UTF-8 source tag, and a length-prefixed encoded vector.
//! Integers are fixed little-endian so files are bit-exact across
//! platforms.
//!
//! One writer at a time, enforced with an advisory file lock; readers
//! never lock and see a prefix of the appended records. A torn trailing
//! record (a crashed writer) is skipped on read and trimmed on the next
//! writer open.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use fs2::FileExt;

use crate::codec::{decode_binary, BinaryDecodeError};

pub const MAGIC: [u8; 4] = *b"WAVX";
pub const VERSION: u8 = 1;
const HEADER_LEN: u64 = 5;

/// One stored vector with its capture time and source tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorRecord {
    /// Seconds since the epoch.
    pub timestamp: u64,
    /// Free-form origin tag, at most 255 bytes of UTF-8.
    pub source_id: String,
    /// Encoded vector bytes.
    pub payload: Vec<u8>,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a vector store: bad magic {found:02x?}")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported store version {0}")]
    UnsupportedVersion(u8),
    #[error("record payload does not decode: {0}")]
    InvalidPayload(#[from] BinaryDecodeError),
    #[error("source tag of {0} bytes exceeds the 255-byte limit")]
    SourceTooLong(usize),
    #[error("payload of {0} bytes exceeds the 255-byte limit")]
    PayloadTooLong(usize),
    #[error("store is locked by another writer")]
    Locked,
    #[error("truncated record at byte offset {offset}; trailing data skipped")]
    TruncatedTail { offset: u64 },
}

fn encode_record(rec: &VectorRecord) -> Result<Vec<u8>, StoreError> {
    if rec.source_id.len() > 255 {
        return Err(StoreError::SourceTooLong(rec.source_id.len()));
    }
    if rec.payload.len() > 255 {
        return Err(StoreError::PayloadTooLong(rec.payload.len()));
    }
    decode_binary(&rec.payload)?;

    let mut buf = Vec::with_capacity(10 + rec.source_id.len() + rec.payload.len());
    buf.extend_from_slice(&rec.timestamp.to_le_bytes());
    buf.push(rec.source_id.len() as u8);
    buf.extend_from_slice(rec.source_id.as_bytes());
    buf.push(rec.payload.len() as u8);
    buf.extend_from_slice(&rec.payload);
    Ok(buf)
}

/// Parses one record from `data` at `pos`. Returns the record and the
/// position after it, or `None` when the remaining bytes are a torn tail.
fn parse_record(data: &[u8], pos: usize) -> Option<(VectorRecord, usize)> {
    let rest = &data[pos..];
    if rest.len() < 9 {
        return None;
    }
    let timestamp = u64::from_le_bytes(rest[0..8].try_into().unwrap());
    let source_len = rest[8] as usize;
    if rest.len() < 9 + source_len + 1 {
        return None;
    }
    let source_id = String::from_utf8_lossy(&rest[9..9 + source_len]).into_owned();
    let payload_len = rest[9 + source_len] as usize;
    let payload_start = 9 + source_len + 1;
    if rest.len() < payload_start + payload_len {
        return None;
    }
    let payload = rest[payload_start..payload_start + payload_len].to_vec();
    Some((VectorRecord { timestamp, source_id, payload }, pos + payload_start + payload_len))
}

fn check_header(data: &[u8]) -> Result<(), StoreError> {
    if data.len() < HEADER_LEN as usize {
        return Err(StoreError::BadMagic {
            found: {
                let mut m = [0u8; 4];
                m[..data.len().min(4)].copy_from_slice(&data[..data.len().min(4)]);
                m
            },
        });
    }
    if data[0..4] != MAGIC {
        let mut found = [0u8; 4];
        found.copy_from_slice(&data[0..4]);
        return Err(StoreError::BadMagic { found });
    }
    if data[4] != VERSION {
        return Err(StoreError::UnsupportedVersion(data[4]));
    }
    Ok(())
}

/// Exclusive append handle. Holding it means holding the advisory lock;
/// dropping it releases the lock.
#[derive(Debug)]
pub struct StoreWriter {
    file: File,
    next_id: u64,
}

impl StoreWriter {
    /// Opens (or creates) a store for appending. Fails with
    /// [`StoreError::Locked`] when another writer holds the file. A torn
    /// trailing record from a crashed writer is trimmed.
    pub fn open(path: impl AsRef<Path>) -> Result<StoreWriter, StoreError> {
        let file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)?;
        file.try_lock_exclusive().map_err(|_| StoreError::Locked)?;

        let mut data = Vec::new();
        {
            let mut f = &file;
            f.seek(SeekFrom::Start(0))?;
            f.read_to_end(&mut data)?;
        }

        let mut writer = StoreWriter { file, next_id: 0 };
        if data.is_empty() {
            writer.file.write_all(&MAGIC)?;
            writer.file.write_all(&[VERSION])?;
            writer.file.sync_data()?;
            return Ok(writer);
        }

        check_header(&data)?;
        let mut pos = HEADER_LEN as usize;
        while pos < data.len() {
            match parse_record(&data, pos) {
                Some((_, next)) => {
                    pos = next;
                    writer.next_id += 1;
                }
                None => {
                    // Torn tail from an interrupted append; drop it.
                    writer.file.set_len(pos as u64)?;
                    break;
                }
            }
        }
        writer.file.seek(SeekFrom::End(0))?;
        Ok(writer)
    }

    /// Appends one record and returns its 0-based ordinal id. The payload
    /// must decode; nothing is written otherwise.
    pub fn append(&mut self, rec: &VectorRecord) -> Result<u64, StoreError> {
        let buf = encode_record(rec)?;
        self.file.write_all(&buf)?;
        let id = self.next_id;
        self.next_id += 1;
        Ok(id)
    }

    /// Forces appended records to stable storage.
    pub fn flush(&mut self) -> Result<(), StoreError> {
        self.file.sync_data()?;
        Ok(())
    }

    /// Id the next append will get.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }
}

/// Record filter for scans. Bounds are inclusive; `None` means unbounded.
#[derive(Debug, Clone, Default)]
pub struct ScanFilter {
    pub from_ts: Option<u64>,
    pub to_ts: Option<u64>,
    /// Exact source tag match.
    pub source: Option<String>,
}

impl ScanFilter {
    pub fn all() -> Self {
        ScanFilter::default()
    }

    fn accepts(&self, rec: &VectorRecord) -> bool {
        if let Some(from) = self.from_ts {
            if rec.timestamp < from {
                return false;
            }
        }
        if let Some(to) = self.to_ts {
            if rec.timestamp > to {
                return false;
            }
        }
        if let Some(source) = &self.source {
            if rec.source_id != *source {
                return false;
            }
        }
        true
    }
}

/// Read handle over a snapshot of the store.
#[derive(Debug)]
pub struct StoreReader {
    data: Vec<u8>,
}

impl StoreReader {
    /// Opens a store for scanning. Readers take no lock; the snapshot is
    /// a prefix of whatever writers have appended.
    pub fn open(path: impl AsRef<Path>) -> Result<StoreReader, StoreError> {
        let mut data = Vec::new();
        File::open(path)?.read_to_end(&mut data)?;
        check_header(&data)?;
        Ok(StoreReader { data })
    }

    /// Iterates records in append order. Ids are ordinals over all
    /// records, so a filter changes which records are yielded but never
    /// their ids. A torn trailing record is reported once as
    /// [`StoreError::TruncatedTail`] and iteration ends.
    pub fn scan(&self, filter: ScanFilter) -> Scan<'_> {
        Scan {
            data: &self.data,
            pos: HEADER_LEN as usize,
            next_id: 0,
            filter,
            done: false,
        }
    }

    /// Number of complete records in the snapshot.
    pub fn len(&self) -> usize {
        self.scan(ScanFilter::all()).filter(|r| r.is_ok()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Iterator over `(id, record)` pairs.
#[derive(Debug)]
pub struct Scan<'a> {
    data: &'a [u8],
    pos: usize,
    next_id: u64,
    filter: ScanFilter,
    done: bool,
}

impl Iterator for Scan<'_> {
    type Item = Result<(u64, VectorRecord), StoreError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done && self.pos < self.data.len() {
            match parse_record(self.data, self.pos) {
                Some((rec, next)) => {
                    let id = self.next_id;
                    self.next_id += 1;
                    self.pos = next;
                    if self.filter.accepts(&rec) {
                        return Some(Ok((id, rec)));
                    }
                }
                None => {
                    self.done = true;
                    return Some(Err(StoreError::TruncatedTail { offset: self.pos as u64 }));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode_binary;
    use crate::taxonomy::{AttackVector, Axis};

    fn sample_payload(threat: u8) -> Vec<u8> {
        let mut v = AttackVector::partial();
        v.set_code(Axis::Threat, threat).unwrap();
        v.set_code(Axis::Action, 0).unwrap();
        encode_binary(&v)
    }

    fn record(ts: u64, source: &str, threat: u8) -> VectorRecord {
        VectorRecord {
            timestamp: ts,
            source_id: source.to_string(),
            payload: sample_payload(threat),
        }
    }

    #[test]
    fn append_then_scan_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.wavx");
        let recs: Vec<VectorRecord> = (0..10).map(|i| record(i, "test", (i % 6) as u8)).collect();

        let mut w = StoreWriter::open(&path).unwrap();
        for (i, rec) in recs.iter().enumerate() {
            assert_eq!(w.append(rec).unwrap(), i as u64);
        }
        w.flush().unwrap();
        drop(w);

        let reader = StoreReader::open(&path).unwrap();
        let got: Vec<(u64, VectorRecord)> =
            reader.scan(ScanFilter::all()).collect::<Result<_, _>>().unwrap();
        assert_eq!(got.len(), 10);
        for (i, (id, rec)) in got.iter().enumerate() {
            assert_eq!(*id, i as u64);
            assert_eq!(rec, &recs[i]);
        }
    }

    #[test]
    fn empty_store_scans_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.wavx");
        drop(StoreWriter::open(&path).unwrap());
        let reader = StoreReader::open(&path).unwrap();
        assert_eq!(reader.scan(ScanFilter::all()).count(), 0);
        assert!(reader.is_empty());
    }

    #[test]
    fn invalid_payload_leaves_file_unchanged() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.wavx");
        let mut w = StoreWriter::open(&path).unwrap();
        w.append(&record(1, "ok", 0)).unwrap();
        w.flush().unwrap();
        let len_before = std::fs::metadata(&path).unwrap().len();

        let bad = VectorRecord {
            timestamp: 2,
            source_id: "bad".to_string(),
            payload: vec![0xff],
        };
        assert!(matches!(w.append(&bad), Err(StoreError::InvalidPayload(_))));
        assert_eq!(w.next_id(), 1);
        w.flush().unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), len_before);
    }

    #[test]
    fn oversized_fields_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = StoreWriter::open(dir.path().join("v.wavx")).unwrap();
        let rec = VectorRecord {
            timestamp: 0,
            source_id: "s".repeat(256),
            payload: sample_payload(0),
        };
        assert!(matches!(w.append(&rec), Err(StoreError::SourceTooLong(256))));
    }

    #[test]
    fn wrong_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("not-a-store");
        std::fs::write(&path, b"JUNKjunkjunk").unwrap();
        assert!(matches!(
            StoreReader::open(&path),
            Err(StoreError::BadMagic { .. })
        ));
        assert!(matches!(
            StoreWriter::open(&path),
            Err(StoreError::BadMagic { .. })
        ));
    }

    #[test]
    fn unsupported_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v2");
        std::fs::write(&path, [b'W', b'A', b'V', b'X', 2]).unwrap();
        assert!(matches!(
            StoreReader::open(&path),
            Err(StoreError::UnsupportedVersion(2))
        ));
    }

    #[test]
    fn truncated_tail_reported_once_and_complete_records_kept() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.wavx");
        let mut w = StoreWriter::open(&path).unwrap();
        for i in 0..3 {
            w.append(&record(i, "s", 0)).unwrap();
        }
        w.flush().unwrap();
        drop(w);

        // Chop the last record in half.
        let len = std::fs::metadata(&path).unwrap().len();
        let file = OpenOptions::new().write(true).open(&path).unwrap();
        file.set_len(len - 3).unwrap();
        drop(file);

        let reader = StoreReader::open(&path).unwrap();
        let items: Vec<_> = reader.scan(ScanFilter::all()).collect();
        assert_eq!(items.len(), 3);
        assert!(items[0].is_ok());
        assert!(items[1].is_ok());
        assert!(matches!(items[2], Err(StoreError::TruncatedTail { .. })));

        // Reopening for append trims the torn tail and keeps counting
        // from the surviving records.
        let mut w = StoreWriter::open(&path).unwrap();
        assert_eq!(w.next_id(), 2);
        w.append(&record(9, "s", 1)).unwrap();
        w.flush().unwrap();
        drop(w);
        let reader = StoreReader::open(&path).unwrap();
        assert_eq!(reader.len(), 3);
    }

    #[test]
    fn filters_select_by_time_and_source() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.wavx");
        let mut w = StoreWriter::open(&path).unwrap();
        w.append(&record(10, "alpha", 0)).unwrap();
        w.append(&record(20, "beta", 1)).unwrap();
        w.append(&record(30, "alpha", 2)).unwrap();
        w.flush().unwrap();
        drop(w);

        let reader = StoreReader::open(&path).unwrap();
        let filter = ScanFilter {
            from_ts: Some(15),
            to_ts: Some(30),
            source: None,
        };
        let ids: Vec<u64> = reader.scan(filter).map(|r| r.unwrap().0).collect();
        assert_eq!(ids, vec![1, 2]);

        let filter = ScanFilter {
            source: Some("alpha".to_string()),
            ..ScanFilter::default()
        };
        let ids: Vec<u64> = reader.scan(filter).map(|r| r.unwrap().0).collect();
        assert_eq!(ids, vec![0, 2]);
    }

    #[test]
    fn second_writer_is_locked_out() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.wavx");
        let w = StoreWriter::open(&path).unwrap();
        assert!(matches!(StoreWriter::open(&path), Err(StoreError::Locked)));
        drop(w);
        assert!(StoreWriter::open(&path).is_ok());
    }

    #[test]
    fn readers_see_prefix_while_writer_active() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.wavx");
        let mut w = StoreWriter::open(&path).unwrap();
        w.append(&record(1, "s", 0)).unwrap();
        w.flush().unwrap();

        let reader = StoreReader::open(&path).unwrap();
        assert_eq!(reader.len(), 1);

        w.append(&record(2, "s", 1)).unwrap();
        w.flush().unwrap();
        let reader = StoreReader::open(&path).unwrap();
        assert_eq!(reader.len(), 2);
    }
}
