//! `wat cluster`: single-linkage clustering of stored vectors at a
//! distance threshold.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use num_traits::ToPrimitive;
use wat_core::analysis::{cluster, parse_decimal, Rational};
use wat_core::codec::{decode_binary, encode_text};
use wat_core::store::{ScanFilter, StoreError, StoreReader};

use crate::config::Config;
use crate::{EXIT_CONFIG, EXIT_OK};

pub struct ClusterArgs {
    pub store: Option<PathBuf>,
    pub threshold: String,
    pub out: Option<PathBuf>,
}

pub fn run(args: &ClusterArgs, config: &Config) -> Result<i32> {
    let Some(threshold) = parse_decimal(&args.threshold) else {
        eprintln!("threshold {:?} is not a decimal value", args.threshold);
        return Ok(EXIT_CONFIG);
    };
    if threshold > Rational::from_integer(1) {
        eprintln!("threshold must lie in [0, 1], got {}", args.threshold);
        return Ok(EXIT_CONFIG);
    }
    let Some(store_path) = args.store.clone().or(config.store_path.clone()) else {
        eprintln!("no store given (use --store or configure one)");
        return Ok(EXIT_CONFIG);
    };

    let reader = StoreReader::open(&store_path)
        .with_context(|| format!("cannot open store {}", store_path.display()))?;
    let mut ids = Vec::new();
    let mut vectors = Vec::new();
    for item in reader.scan(ScanFilter::all()) {
        match item {
            Ok((id, rec)) => {
                ids.push(id);
                vectors.push(rec.payload);
            }
            Err(StoreError::TruncatedTail { offset }) => {
                eprintln!("warning: truncated record at offset {offset} skipped");
            }
            Err(e) => return Err(e).context("scanning store"),
        }
    }

    let clusters = cluster(&vectors, threshold, &config.weights).context("clustering")?;

    let mut writer: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(
            std::fs::File::create(path)
                .with_context(|| format!("cannot create output file {}", path.display()))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };

    for (i, c) in clusters.iter().enumerate() {
        // Medoid decoded for display only; the clustering itself ran on
        // the encoded bytes.
        let medoid_text = decode_binary(&vectors[c.medoid])
            .map(|v| encode_text(&v))
            .unwrap_or_else(|_| "<undecodable>".to_string());
        let members: Vec<String> = c.members.iter().map(|&m| ids[m].to_string()).collect();
        writeln!(
            writer,
            "cluster {:02}: size {} radius {:.3} medoid record {} {} members [{}]",
            i + 1,
            c.members.len(),
            c.radius.to_f64().unwrap_or(f64::NAN),
            ids[c.medoid],
            medoid_text,
            members.join(", ")
        )?;
    }
    writeln!(
        writer,
        "{} records in {} clusters at threshold {}",
        vectors.len(),
        clusters.len(),
        args.threshold
    )?;
    writer.flush()?;
    Ok(EXIT_OK)
}
