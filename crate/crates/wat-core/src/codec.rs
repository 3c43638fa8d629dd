//! Text and binary encodings of attack vectors.
//!
//! The text form is the printed one: nine comma-separated fields in braces,
//! absent axes rendered as `X`, the HTTP element as two hex digits. The
//! binary form is a compact variable-length record: a 9-bit presence mask
//! followed by the present fields' values at their taxonomy bit widths,
//! zero-padded to a byte boundary. Most-significant bit first throughout,
//! mask before payload, so the byte stream has no endianness.
//!
//! Analysis code works on the encoded bytes directly; [`decode_count`]
//! exposes a process-wide counter of taxonomy-object decodes so that
//! decode-free pipelines can be verified.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::taxonomy::{AttackVector, Axis};

static DECODE_CALLS: AtomicU64 = AtomicU64::new(0);

/// Number of times a stored encoding has been decoded back into an
/// [`AttackVector`] in this process (both text and binary forms).
pub fn decode_count() -> u64 {
    DECODE_CALLS.load(Ordering::Relaxed)
}

/// Renders the canonical text form, e.g. `{0, X, 1, 9, 0, 01, 1, X, 0}`.
///
/// Output is byte-identical for equal vectors and reparses to the same
/// vector via [`parse_text`].
pub fn encode_text(v: &AttackVector) -> String {
    let mut out = String::with_capacity(40);
    out.push('{');
    for axis in Axis::ALL {
        if axis.index() > 0 {
            out.push_str(", ");
        }
        match v.code(axis) {
            None => out.push('X'),
            Some(code) if axis == Axis::HttpElement => {
                out.push_str(&format!("{code:02x}"));
            }
            Some(code) => out.push_str(&code.to_string()),
        }
    }
    out.push('}');
    out
}

/// Why a text vector failed to parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MalformedKind {
    /// Input is not wrapped in `{`...`}`.
    NotBraced,
    /// Field is empty.
    Empty,
    /// Field value outside the axis range.
    OutOfRange,
    /// Field is not decimal digits or `X`.
    BadDigits,
    /// HTTP element field is not exactly two hex digits.
    BadHex,
    /// Fewer than nine fields.
    MissingFields { found: usize },
    /// More than nine fields.
    ExtraFields { found: usize },
}

impl fmt::Display for MalformedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MalformedKind::NotBraced => write!(f, "not braced"),
            MalformedKind::Empty => write!(f, "empty"),
            MalformedKind::OutOfRange => write!(f, "out of range"),
            MalformedKind::BadDigits => write!(f, "not a decimal value"),
            MalformedKind::BadHex => write!(f, "not a two-digit hex value"),
            MalformedKind::MissingFields { found } => write!(f, "only {found} fields"),
            MalformedKind::ExtraFields { found } => write!(f, "{found} fields"),
        }
    }
}

/// Text parse failure; `field` is the 1-based index of the first offending
/// field (0 when the brace structure itself is wrong).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed vector at field {field}: {kind}")]
pub struct MalformedVector {
    pub field: usize,
    pub kind: MalformedKind,
}

/// Parses the text form. Liberal in whitespace around fields and in hex
/// case; everything else must conform.
pub fn parse_text(s: &str) -> Result<AttackVector, MalformedVector> {
    DECODE_CALLS.fetch_add(1, Ordering::Relaxed);
    let trimmed = s.trim();
    let inner = trimmed
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or(MalformedVector {
            field: 0,
            kind: MalformedKind::NotBraced,
        })?;

    let fields: Vec<&str> = inner.split(',').map(str::trim).collect();
    let mut vector = AttackVector::new();
    for (i, (field, axis)) in fields.iter().zip(Axis::ALL).enumerate() {
        let position = i + 1;
        let err = |kind| MalformedVector { field: position, kind };
        if field.is_empty() {
            return Err(err(MalformedKind::Empty));
        }
        if field.eq_ignore_ascii_case("X") {
            continue;
        }
        let code = if axis == Axis::HttpElement {
            if field.len() != 2 || !field.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(err(MalformedKind::BadHex));
            }
            u8::from_str_radix(field, 16).unwrap()
        } else {
            if !field.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err(MalformedKind::BadDigits));
            }
            field.parse::<u8>().map_err(|_| err(MalformedKind::OutOfRange))?
        };
        vector
            .set_code(axis, code)
            .map_err(|_| err(MalformedKind::OutOfRange))?;
    }

    match fields.len() {
        n if n < 9 => {
            return Err(MalformedVector {
                field: n + 1,
                kind: MalformedKind::MissingFields { found: n },
            })
        }
        n if n > 9 => {
            return Err(MalformedVector {
                field: 10,
                kind: MalformedKind::ExtraFields { found: n },
            })
        }
        _ => {}
    }

    vector.declared_partial = !vector.is_complete();
    Ok(vector)
}

/// Record length in bytes for a given presence bitmap: 9 mask bits plus the
/// present fields' widths, rounded up to whole bytes.
pub fn encoded_len(presence_mask: u16) -> usize {
    let payload: u32 = Axis::ALL
        .iter()
        .filter(|a| presence_mask & (1 << a.index()) != 0)
        .map(|a| a.bit_width())
        .sum();
    (9 + payload as usize).div_ceil(8)
}

struct BitWriter {
    bytes: Vec<u8>,
    used: usize,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter { bytes: Vec::new(), used: 0 }
    }

    fn push(&mut self, value: u8, width: u32) {
        for shift in (0..width).rev() {
            let bit = (value >> shift) & 1;
            if self.used.is_multiple_of(8) {
                self.bytes.push(0);
            }
            let byte = self.bytes.last_mut().unwrap();
            *byte |= bit << (7 - (self.used % 8));
            self.used += 1;
        }
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    fn take(&mut self, width: u32) -> u8 {
        let mut value = 0u8;
        for _ in 0..width {
            let byte = self.bytes[self.pos / 8];
            let bit = (byte >> (7 - (self.pos % 8))) & 1;
            value = (value << 1) | bit;
            self.pos += 1;
        }
        value
    }
}

/// Encodes a vector into its variable-length binary record.
pub fn encode_binary(v: &AttackVector) -> Vec<u8> {
    let mut w = BitWriter::new();
    let mask = v.presence_mask();
    for axis in Axis::ALL {
        w.push(((mask >> axis.index()) & 1) as u8, 1);
    }
    for axis in Axis::ALL {
        if let Some(code) = v.code(axis) {
            w.push(code, axis.bit_width());
        }
    }
    debug_assert_eq!(w.bytes.len(), encoded_len(mask));
    w.bytes
}

/// Why a binary record failed to decode.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BinaryDecodeError {
    #[error("truncated record: need {expected} bytes, got {got}")]
    TruncatedRecord { expected: usize, got: usize },
    #[error("non-zero padding in final byte at offset {byte_offset}")]
    NonZeroPadding { byte_offset: usize },
    #[error("field {axis} decodes out of range (value {value})")]
    OutOfRangeField { axis: Axis, value: u8 },
    #[error("trailing bytes after record: expected {expected} bytes, got {got}")]
    TrailingData { expected: usize, got: usize },
}

/// Decodes a binary record produced by [`encode_binary`]. The slice must be
/// exactly one record.
pub fn decode_binary(bytes: &[u8]) -> Result<AttackVector, BinaryDecodeError> {
    DECODE_CALLS.fetch_add(1, Ordering::Relaxed);
    if bytes.len() < 2 {
        return Err(BinaryDecodeError::TruncatedRecord {
            expected: 2,
            got: bytes.len(),
        });
    }
    let mut r = BitReader::new(bytes);
    let mut mask = 0u16;
    for i in 0..9 {
        mask |= (r.take(1) as u16) << i;
    }
    let expected = encoded_len(mask);
    if bytes.len() < expected {
        return Err(BinaryDecodeError::TruncatedRecord {
            expected,
            got: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(BinaryDecodeError::TrailingData {
            expected,
            got: bytes.len(),
        });
    }

    let mut vector = AttackVector::new();
    for axis in Axis::ALL {
        if mask & (1 << axis.index()) != 0 {
            let value = r.take(axis.bit_width());
            vector
                .set_code(axis, value)
                .map_err(|_| BinaryDecodeError::OutOfRangeField { axis, value })?;
        }
    }

    // Every bit after the payload must be zero padding.
    let mut pos = r.pos;
    while pos < bytes.len() * 8 {
        let byte = bytes[pos / 8];
        if (byte >> (7 - (pos % 8))) & 1 != 0 {
            return Err(BinaryDecodeError::NonZeroPadding { byte_offset: pos / 8 });
        }
        pos += 1;
    }

    vector.declared_partial = !vector.is_complete();
    Ok(vector)
}
