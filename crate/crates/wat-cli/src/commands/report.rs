//! `wat report`: severity histogram and per-threat counts over a store.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use wat_core::analysis::{severity, SeverityLevel};
use wat_core::codec::decode_binary;
use wat_core::store::{ScanFilter, StoreError, StoreReader};
use wat_core::taxonomy::Threat;

use crate::config::Config;
use crate::{EXIT_CONFIG, EXIT_OK};

pub struct ReportArgs {
    pub store: Option<PathBuf>,
}

pub fn run(args: &ReportArgs, config: &Config) -> Result<i32> {
    let Some(store_path) = args.store.clone().or(config.store_path.clone()) else {
        eprintln!("no store given (use --store or configure one)");
        return Ok(EXIT_CONFIG);
    };
    let reader = StoreReader::open(&store_path)
        .with_context(|| format!("cannot open store {}", store_path.display()))?;

    let mut total = 0usize;
    let mut by_level: BTreeMap<SeverityLevel, usize> = BTreeMap::new();
    let mut unscored = 0usize;
    let mut by_threat: BTreeMap<&'static str, usize> = BTreeMap::new();

    for item in reader.scan(ScanFilter::all()) {
        let (_, rec) = match item {
            Ok(pair) => pair,
            Err(StoreError::TruncatedTail { offset }) => {
                eprintln!("warning: truncated record at offset {offset} skipped");
                continue;
            }
            Err(e) => return Err(e).context("scanning store"),
        };
        total += 1;
        match severity(&rec.payload, &config.severity) {
            Ok((_, level)) => *by_level.entry(level).or_default() += 1,
            Err(_) => unscored += 1,
        }
        // Decoded for reporting only.
        let threat = decode_binary(&rec.payload).ok().and_then(|v| v.threat);
        let name = threat.map_or("(none)", Threat::name);
        *by_threat.entry(name).or_default() += 1;
    }

    println!("{total} stored vectors");
    println!("severity:");
    for level in [SeverityLevel::Low, SeverityLevel::Medium, SeverityLevel::High] {
        println!("  {:<8} {}", level.name(), by_level.get(&level).copied().unwrap_or(0));
    }
    if unscored > 0 {
        println!("  {:<8} {unscored}", "unscored");
    }
    println!("threats:");
    for (name, count) in &by_threat {
        println!("  {name:<16} {count}");
    }
    Ok(EXIT_OK)
}
