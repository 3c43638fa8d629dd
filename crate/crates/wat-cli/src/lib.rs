//! Batch front end: classify requests and logs, convert vector encodings,
//! reproduce the bundled corpus, and analyze stored vectors.

pub mod commands;
pub mod config;
pub mod corpus;
pub mod output;

use std::path::Path;

use anyhow::{Context, Result};
use wat_core::classifier::{load_rules, parse_rules, RuleSet};

use corpus::{load_corpus, parse_corpus, CorpusEntry};

/// Default signature rules covering the worked-example corpus.
pub const BUNDLED_RULES: &str = include_str!("../data/rules.conf");
/// The worked-example corpus: raw requests with their published vectors.
pub const BUNDLED_CORPUS: &str = include_str!("../data/corpus.txt");

/// Exit code: ran clean, nothing detected.
pub const EXIT_OK: i32 = 0;
/// Exit code: configuration or I/O failure.
pub const EXIT_CONFIG: i32 = 1;
/// Exit code: malformed data lines.
pub const EXIT_DATA: i32 = 2;
/// Exit code: attacks were detected.
pub const EXIT_ATTACKS: i32 = 3;
/// Exit code: corpus reproduction mismatch.
pub const EXIT_CORPUS: i32 = 4;

/// Resolves the rule set: explicit flag, then config, then bundled.
pub fn resolve_rules(flag: Option<&Path>, config: &config::Config) -> Result<RuleSet> {
    match flag.or(config.rules_path.as_deref()) {
        Some(path) => load_rules(path).with_context(|| format!("loading rules {}", path.display())),
        None => parse_rules(BUNDLED_RULES, "bundled rules").context("parsing bundled rules"),
    }
}

/// Resolves the corpus: explicit flag, then config, then bundled.
pub fn resolve_corpus(flag: Option<&Path>, config: &config::Config) -> Result<Vec<CorpusEntry>> {
    match flag.or(config.corpus_path.as_deref()) {
        Some(path) => {
            load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))
        }
        None => parse_corpus(BUNDLED_CORPUS).context("parsing bundled corpus"),
    }
}
