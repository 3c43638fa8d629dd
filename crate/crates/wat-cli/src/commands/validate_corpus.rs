//! `wat validate-corpus`: classify every corpus entry and compare the
//! result against its published (or corrected) vector.

use std::path::PathBuf;

use anyhow::Result;
use wat_core::classifier::{classify_sequence, RuleSet};
use wat_core::codec::{encode_text, parse_text};
use wat_core::http::{parse_raw_request, HttpRequest};

use crate::config::Config;
use crate::corpus::CorpusEntry;
use crate::{EXIT_CORPUS, EXIT_OK};

pub struct ValidateCorpusArgs {
    pub corpus: Option<PathBuf>,
    pub rules: Option<PathBuf>,
}

enum Outcome {
    Pass,
    Fail(String),
}

fn check_entry(entry: &CorpusEntry, rules: &RuleSet, config: &Config) -> Outcome {
    let mut requests: Vec<HttpRequest> = Vec::new();
    for (i, raw) in entry.requests.iter().enumerate() {
        match parse_raw_request(raw.as_bytes()) {
            Ok(mut r) => {
                r.source_ref = Some(format!("item {} request {}", entry.id, i + 1));
                requests.push(r);
            }
            Err(e) => return Outcome::Fail(format!("request {} does not parse: {e}", i + 1)),
        }
    }

    let expected = match parse_text(entry.expected_vector()) {
        Ok(v) => encode_text(&v),
        Err(e) => return Outcome::Fail(format!("expected vector does not parse: {e}")),
    };

    let classifications = classify_sequence(&requests, rules, &config.classifier_config());
    match classifications.as_slice() {
        [] => Outcome::Fail("no classification produced".to_string()),
        [c] => {
            let got = encode_text(&c.vector);
            if got == expected {
                Outcome::Pass
            } else {
                Outcome::Fail(format!("expected {expected}, got {got}"))
            }
        }
        many => Outcome::Fail(format!("{} classifications produced, wanted one", many.len())),
    }
}

pub fn run(args: &ValidateCorpusArgs, config: &Config) -> Result<i32> {
    let rules = crate::resolve_rules(args.rules.as_deref(), config)?;
    let mut entries = crate::resolve_corpus(args.corpus.as_deref(), config)?;
    entries.sort_by_key(|e| e.id);

    let mut passed = 0usize;
    let mut errata = 0usize;
    for entry in &entries {
        let note = if entry.is_erratum() {
            errata += 1;
            " (erratum, corrected vector)"
        } else {
            ""
        };
        match check_entry(entry, &rules, config) {
            Outcome::Pass => {
                passed += 1;
                println!("item {:02}: PASS{note}", entry.id);
            }
            Outcome::Fail(reason) => println!("item {:02}: FAIL{note}: {reason}", entry.id),
        }
    }

    println!(
        "{passed}/{} entries reproduce their vectors ({errata} errata checked against corrected readings)",
        entries.len()
    );
    Ok(if passed == entries.len() { EXIT_OK } else { EXIT_CORPUS })
}
