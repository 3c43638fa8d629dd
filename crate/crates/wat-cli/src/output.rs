//! Classification output records, in human text or JSON Lines form.

use num_traits::ToPrimitive;
use serde::Serialize;
use wat_core::analysis::{severity, SeverityPolicy};
use wat_core::classifier::{Classification, Confidence};
use wat_core::codec::{encode_binary, encode_text};

use crate::config::OutputFormat;

/// One emitted classification.
#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub request_ref: String,
    pub vector: String,
    /// Severity score in [0, 1]; absent when the vector has no threat.
    pub severity: Option<f64>,
    pub level: Option<String>,
    pub rules: Vec<String>,
    pub cve: Vec<String>,
    pub confidence: String,
    pub evidence: Vec<String>,
}

impl OutputRecord {
    pub fn new(c: &Classification, policy: &SeverityPolicy) -> OutputRecord {
        let encoded = encode_binary(&c.vector);
        let (score, level) = match severity(&encoded, policy) {
            Ok((score, level)) => (score.to_f64(), Some(level.name().to_string())),
            Err(_) => (None, None),
        };

        let mut evidence = Vec::new();
        for rule in &c.matched_rules {
            for m in &rule.matches {
                evidence.push(format!("{}: {} ~ {:?}", rule.rule_id, m.location, m.matched));
            }
        }
        for finding in &c.structural {
            evidence.push(format!("{}: {}", finding.check, finding.detail));
        }
        for warning in &c.warnings {
            evidence.push(format!("warning: {warning}"));
        }

        OutputRecord {
            request_ref: c.request_ref.clone(),
            vector: encode_text(&c.vector),
            severity: score,
            level,
            rules: c.rule_ids().map(str::to_string).collect(),
            cve: c.cves().map(str::to_string).collect(),
            confidence: match c.confidence {
                Confidence::RuleMatch => "rule_match".to_string(),
                Confidence::StructuralOnly => "structural_only".to_string(),
            },
            evidence,
        }
    }

    /// Renders the record for the requested format. Text gets a summary
    /// line plus indented evidence lines; JSON is one object per line.
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::JsonLines => {
                serde_json::to_string(self).expect("output record serializes")
            }
            OutputFormat::Text => {
                let severity = match (&self.severity, &self.level) {
                    (Some(score), Some(level)) => format!("{score:.2} {level}"),
                    _ => "-".to_string(),
                };
                let rules = if self.rules.is_empty() {
                    "-".to_string()
                } else {
                    self.rules.join(",")
                };
                let cve = if self.cve.is_empty() {
                    "-".to_string()
                } else {
                    self.cve.join(",")
                };
                let mut out = format!(
                    "{}  {}  severity {severity}  rules {rules}  cve {cve}",
                    self.request_ref, self.vector
                );
                for line in &self.evidence {
                    out.push_str("\n    ");
                    out.push_str(line);
                }
                out
            }
        }
    }
}
