//! `wat encode` / `wat decode`: lossless conversion between the text
//! vector form and binary records printed as hex, one per line.

use std::io::{BufRead, Write};

use anyhow::Result;
use wat_core::codec::{decode_binary, encode_binary, encode_text, parse_text};

use crate::{EXIT_DATA, EXIT_OK};

fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn from_hex(s: &str) -> Option<Vec<u8>> {
    if !s.len().is_multiple_of(2) || s.is_empty() {
        return None;
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).ok())
        .collect()
}

/// Text vectors in, hex records out. Malformed lines are reported with
/// their line number and skipped; any failure makes the exit code 2.
pub fn run_encode(input: impl BufRead, mut output: impl Write) -> Result<i32> {
    let mut failed = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_text(&line) {
            Ok(vector) => writeln!(output, "{}", to_hex(&encode_binary(&vector)))?,
            Err(e) => {
                eprintln!("line {}: {e}", i + 1);
                failed = true;
            }
        }
    }
    Ok(if failed { EXIT_DATA } else { EXIT_OK })
}

/// Hex records in, text vectors out.
pub fn run_decode(input: impl BufRead, mut output: impl Write) -> Result<i32> {
    let mut failed = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let Some(bytes) = from_hex(trimmed) else {
            eprintln!("line {}: not a hex record", i + 1);
            failed = true;
            continue;
        };
        match decode_binary(&bytes) {
            Ok(vector) => writeln!(output, "{}", encode_text(&vector))?,
            Err(e) => {
                eprintln!("line {}: {e}", i + 1);
                failed = true;
            }
        }
    }
    Ok(if failed { EXIT_DATA } else { EXIT_OK })
}
