//! `wat classify`: run the rule set over a file of raw requests or log
//! lines, emit one record per detected attack, optionally append the
//! encoded vectors to a store.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use wat_core::classifier::classify_sequence;
use wat_core::codec::encode_binary;
use wat_core::http::{parse_log_line, parse_raw_request, split_raw_stream, HttpRequest, LogFormat};
use wat_core::store::{StoreWriter, VectorRecord};
use wat_core::taxonomy::validate;

use crate::config::{Config, OutputFormat};
use crate::output::OutputRecord;
use crate::{EXIT_ATTACKS, EXIT_OK};

/// Input flavors accepted by `classify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    /// Raw HTTP requests separated by `%%%` lines.
    Raw,
    /// Common Log Format lines.
    Clf,
    /// Combined Log Format lines.
    Combined,
}

pub struct ClassifyArgs {
    pub input: PathBuf,
    pub format: InputFormat,
    pub rules: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub output: Option<OutputFormat>,
}

fn read_requests(input: &Path, format: InputFormat) -> Result<Vec<HttpRequest>> {
    let name = input.display().to_string();
    let data = std::fs::read(input).with_context(|| format!("cannot read input {name}"))?;
    let mut requests = Vec::new();
    match format {
        InputFormat::Raw => {
            for (i, block) in split_raw_stream(&data).into_iter().enumerate() {
                match parse_raw_request(block) {
                    Ok(mut r) => {
                        r.source_ref = Some(format!("{name}:{}", i + 1));
                        requests.push(r);
                    }
                    Err(e) => eprintln!("{name}: request {}: {e}", i + 1),
                }
            }
        }
        InputFormat::Clf | InputFormat::Combined => {
            let log_format = if format == InputFormat::Clf {
                LogFormat::Common
            } else {
                LogFormat::Combined
            };
            let text = String::from_utf8_lossy(&data);
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match parse_log_line(line, log_format) {
                    Ok(mut r) => {
                        r.source_ref = Some(format!("{name}:{}", i + 1));
                        requests.push(r);
                    }
                    Err(e) => eprintln!("{name}: line {}: {e}", i + 1),
                }
            }
        }
    }
    Ok(requests)
}

pub fn run(args: &ClassifyArgs, config: &Config) -> Result<i32> {
    let rules = crate::resolve_rules(args.rules.as_deref(), config)?;
    let requests = read_requests(&args.input, args.format)?;
    let classifier_config = config.classifier_config();
    let classifications = classify_sequence(&requests, &rules, &classifier_config);

    // Request timestamps, for stored records.
    let timestamps: HashMap<String, u64> = requests
        .iter()
        .filter_map(|r| Some((r.source_ref.clone()?, r.timestamp?)))
        .collect();
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);

    let mut writer: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(
            std::fs::File::create(path)
                .with_context(|| format!("cannot create output file {}", path.display()))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };

    let mut store = match args.store.as_deref().or(config.store_path.as_deref()) {
        Some(path) => Some(
            StoreWriter::open(path)
                .with_context(|| format!("cannot open store {}", path.display()))?,
        ),
        None => None,
    };

    let format = args.output.unwrap_or_else(|| config.output());
    let mode = config.validation();
    for c in &classifications {
        let report = validate(&c.vector, mode);
        for violation in &report.violations {
            eprintln!("{}: validation: {violation}", c.request_ref);
        }
        writeln!(writer, "{}", OutputRecord::new(c, &config.severity).render(format))?;
        if let Some(store) = store.as_mut() {
            let record = VectorRecord {
                timestamp: timestamps.get(&c.request_ref).copied().unwrap_or(now),
                source_id: c.request_ref.clone(),
                payload: encode_binary(&c.vector),
            };
            store.append(&record).context("appending to store")?;
        }
    }
    if let Some(store) = store.as_mut() {
        store.flush().context("flushing store")?;
    }
    writer.flush()?;

    Ok(if classifications.is_empty() { EXIT_OK } else { EXIT_ATTACKS })
}
