//! Rule file parsing.
//!
//! Rules are line-oriented sections. A `[rule <id>]` section carries
//! `match.<kind>` predicate lines and `set.<axis>` assignment lines; a
//! `[window <id>]` section describes a request-sequence trigger. `#` starts
//! a comment, blank lines separate sections.
//!
//! ```text
//! [rule sql-drop-table]
//! priority = 50
//! cve = CVE-0000-0000
//! describe = SQL injection dropping a table
//! match.param = (?i);\s*drop\s+table
//! set.entry_point = web_application
//! set.vulnerability = code_injection
//! ```
//!
//! Predicate kinds: `method`, `path`, `query`, `param`, `param_length`,
//! `header_present`, `header`, `body`, `decoded`. The parameter kinds take
//! an optional `@<source>` suffix (`query`, `body`, `cookie`, `header`,
//! `path`). `header` patterns are written `Name: regex`. Axis values are
//! symbolic names or the taxonomy codes; `http_element` values are hex or
//! `|`-joined element names.

use std::fmt;
use std::path::Path;

use regex::Regex;

use crate::http::ParamSource;
use crate::taxonomy::{AttackVector, Axis, HttpElementMask};

/// A single request predicate.
#[derive(Debug, Clone)]
pub enum Predicate {
    /// Verb comparison, case-insensitive.
    MethodEquals(String),
    /// Regex over the raw request path.
    PathMatches(Regex),
    /// Regex over the raw query string.
    QueryMatches(Regex),
    /// Regex over `name=decoded_value` of any parameter.
    ParamMatches { pattern: Regex, source: Option<ParamSource> },
    /// Any parameter whose decoded name or value reaches this length.
    ParamLengthAtLeast { min: usize, source: Option<ParamSource> },
    /// Header present by name. Abstains on log-derived requests, which do
    /// not carry headers.
    HeaderPresent(String),
    /// Header present and its value matches.
    HeaderMatches { name: String, pattern: Regex },
    /// Regex over the raw body.
    BodyMatches(Regex),
    /// Substring of any parameter's decoded name or value.
    DecodedContains { needle: String, source: Option<ParamSource> },
}

impl Predicate {
    /// Header name this predicate inspects, if any. Used for the HTTP
    /// element mask: headers count only when a matched rule references
    /// them.
    pub fn header_name(&self) -> Option<&str> {
        match self {
            Predicate::HeaderPresent(name) => Some(name),
            Predicate::HeaderMatches { name, .. } => Some(name),
            _ => None,
        }
    }

    /// Parameter source filter, if the predicate has one.
    pub fn source_filter(&self) -> Option<ParamSource> {
        match self {
            Predicate::ParamMatches { source, .. }
            | Predicate::ParamLengthAtLeast { source, .. }
            | Predicate::DecodedContains { source, .. } => *source,
            _ => None,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::MethodEquals(m) => write!(f, "method = {m}"),
            Predicate::PathMatches(p) => write!(f, "path ~ {p}"),
            Predicate::QueryMatches(p) => write!(f, "query ~ {p}"),
            Predicate::ParamMatches { pattern, source } => match source {
                Some(s) => write!(f, "param@{s} ~ {pattern}"),
                None => write!(f, "param ~ {pattern}"),
            },
            Predicate::ParamLengthAtLeast { min, source } => match source {
                Some(s) => write!(f, "param_length@{s} >= {min}"),
                None => write!(f, "param_length >= {min}"),
            },
            Predicate::HeaderPresent(name) => write!(f, "header {name} present"),
            Predicate::HeaderMatches { name, pattern } => write!(f, "header {name} ~ {pattern}"),
            Predicate::BodyMatches(p) => write!(f, "body ~ {p}"),
            Predicate::DecodedContains { needle, source } => match source {
                Some(s) => write!(f, "decoded@{s} contains {needle:?}"),
                None => write!(f, "decoded contains {needle:?}"),
            },
        }
    }
}

/// One signature: predicates that must all hold, and the axis values the
/// match contributes to the attack vector.
#[derive(Debug, Clone)]
pub struct Rule {
    pub id: String,
    pub description: String,
    pub cve: Option<String>,
    pub predicates: Vec<Predicate>,
    pub assigns: AttackVector,
    pub priority: i32,
}

/// A request-sequence trigger: enough repeats against one path, within a
/// time window, with a fixed parameter held constant and a varying
/// parameter taking pairwise-distinct values.
#[derive(Debug, Clone)]
pub struct SequenceWindow {
    pub id: String,
    pub description: String,
    pub path: Regex,
    pub window_secs: u64,
    pub min_repeats: usize,
    pub fixed_param: Regex,
    pub varying_param: Regex,
    /// Extra axis values the trigger contributes. The threat and action
    /// axes are owned by the trigger itself and cannot be assigned here.
    pub assigns: AttackVector,
}

/// Parsed rule file: rules ordered by descending priority (ties broken by
/// id), plus sequence windows.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
    windows: Vec<SequenceWindow>,
}

impl RuleSet {
    pub fn empty() -> Self {
        RuleSet::default()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn windows(&self) -> &[SequenceWindow] {
        &self.windows
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.windows.is_empty()
    }
}

/// Rule loading failure.
#[derive(Debug, thiserror::Error)]
pub enum RuleLoadError {
    #[error("cannot read rules file: {0}")]
    Io(#[from] std::io::Error),
    #[error("{file}:{line}: {reason}")]
    Syntax { file: String, line: usize, reason: String },
    #[error("duplicate rule id {id:?}")]
    DuplicateRuleId { id: String },
    #[error("rule {id:?}, field {field}: {reason}")]
    InvalidAssignment { id: String, field: String, reason: String },
}

/// Loads and validates a rule file.
pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleSet, RuleLoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_rules(&text, &path.display().to_string())
}

enum Section {
    Rule(Rule),
    Window(WindowBuilder),
}

struct WindowBuilder {
    id: String,
    description: String,
    path: Option<Regex>,
    window_secs: Option<u64>,
    min_repeats: Option<usize>,
    fixed_param: Option<Regex>,
    varying_param: Option<Regex>,
    assigns: AttackVector,
}

/// Parses rule text. `file` is only used in error messages.
pub fn parse_rules(text: &str, file: &str) -> Result<RuleSet, RuleLoadError> {
    let syntax = |line: usize, reason: String| RuleLoadError::Syntax {
        file: file.to_string(),
        line,
        reason,
    };

    let mut set = RuleSet::default();
    let mut seen_ids = std::collections::HashSet::new();
    let mut current: Option<(Section, usize)> = None;

    let finish = |section: Option<(Section, usize)>, set: &mut RuleSet| -> Result<(), RuleLoadError> {
        match section {
            None => Ok(()),
            Some((Section::Rule(rule), start)) => {
                if rule.predicates.is_empty() {
                    return Err(RuleLoadError::Syntax {
                        file: file.to_string(),
                        line: start,
                        reason: format!("rule {:?} has no match lines", rule.id),
                    });
                }
                if rule.assigns.present_axes().next().is_none() {
                    return Err(RuleLoadError::InvalidAssignment {
                        id: rule.id.clone(),
                        field: "-".to_string(),
                        reason: "rule assigns no axis".to_string(),
                    });
                }
                set.rules.push(rule);
                Ok(())
            }
            Some((Section::Window(w), start)) => {
                let missing = |key: &str| RuleLoadError::Syntax {
                    file: file.to_string(),
                    line: start,
                    reason: format!("window {:?} is missing {key}", w.id),
                };
                let window = SequenceWindow {
                    path: w.path.ok_or_else(|| missing("path"))?,
                    window_secs: w.window_secs.ok_or_else(|| missing("seconds"))?,
                    min_repeats: w.min_repeats.ok_or_else(|| missing("min_repeats"))?,
                    fixed_param: w.fixed_param.ok_or_else(|| missing("fixed"))?,
                    varying_param: w.varying_param.ok_or_else(|| missing("varying"))?,
                    id: w.id,
                    description: w.description,
                    assigns: w.assigns,
                };
                set.windows.push(window);
                Ok(())
            }
        }
    };

    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }

        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            finish(current.take(), &mut set)?;
            let (kind, id) = header
                .trim()
                .split_once(char::is_whitespace)
                .ok_or_else(|| syntax(line_no, format!("bad section header {line:?}")))?;
            let id = id.trim().to_string();
            if id.is_empty() {
                return Err(syntax(line_no, "section id is empty".to_string()));
            }
            if !seen_ids.insert(id.clone()) {
                return Err(RuleLoadError::DuplicateRuleId { id });
            }
            current = Some((
                match kind {
                    "rule" => Section::Rule(Rule {
                        id,
                        description: String::new(),
                        cve: None,
                        predicates: Vec::new(),
                        assigns: AttackVector::partial(),
                        priority: 0,
                    }),
                    "window" => Section::Window(WindowBuilder {
                        id,
                        description: String::new(),
                        path: None,
                        window_secs: None,
                        min_repeats: None,
                        fixed_param: None,
                        varying_param: None,
                        assigns: AttackVector::partial(),
                    }),
                    other => {
                        return Err(syntax(line_no, format!("unknown section kind {other:?}")))
                    }
                },
                line_no,
            ));
            continue;
        }

        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax(line_no, format!("expected key = value, got {line:?}")))?;
        let key = key.trim();
        let value = value.trim();

        let (section, _) = current
            .as_mut()
            .ok_or_else(|| syntax(line_no, "key outside any section".to_string()))?;

        match section {
            Section::Rule(rule) => {
                apply_rule_key(rule, key, value).map_err(|reason| match reason {
                    KeyError::Syntax(reason) => syntax(line_no, reason),
                    KeyError::Assignment { field, reason } => RuleLoadError::InvalidAssignment {
                        id: rule.id.clone(),
                        field,
                        reason,
                    },
                })?;
            }
            Section::Window(w) => {
                apply_window_key(w, key, value).map_err(|reason| match reason {
                    KeyError::Syntax(reason) => syntax(line_no, reason),
                    KeyError::Assignment { field, reason } => RuleLoadError::InvalidAssignment {
                        id: w.id.clone(),
                        field,
                        reason,
                    },
                })?;
            }
        }
    }
    finish(current.take(), &mut set)?;

    set.rules.sort_by(|a, b| b.priority.cmp(&a.priority).then_with(|| a.id.cmp(&b.id)));
    Ok(set)
}

enum KeyError {
    Syntax(String),
    Assignment { field: String, reason: String },
}

fn compile(pattern: &str) -> Result<Regex, KeyError> {
    Regex::new(pattern).map_err(|e| KeyError::Syntax(format!("bad pattern {pattern:?}: {e}")))
}

fn parse_source_suffix(kind: &str) -> Result<(String, Option<ParamSource>), KeyError> {
    match kind.split_once('@') {
        None => Ok((kind.to_string(), None)),
        Some((base, source)) => {
            let source = ParamSource::from_name(source)
                .ok_or_else(|| KeyError::Syntax(format!("unknown parameter source {source:?}")))?;
            Ok((base.to_string(), Some(source)))
        }
    }
}

fn apply_rule_key(rule: &mut Rule, key: &str, value: &str) -> Result<(), KeyError> {
    if let Some(kind) = key.strip_prefix("match.") {
        let (base, source) = parse_source_suffix(kind)?;
        let predicate = match base.as_str() {
            "method" => Predicate::MethodEquals(value.to_string()),
            "path" => Predicate::PathMatches(compile(value)?),
            "query" => Predicate::QueryMatches(compile(value)?),
            "param" => Predicate::ParamMatches { pattern: compile(value)?, source },
            "param_length" => {
                let min: usize = value.parse().map_err(|_| {
                    KeyError::Syntax(format!("param_length wants a positive integer, got {value:?}"))
                })?;
                if min == 0 {
                    return Err(KeyError::Syntax("param_length must be positive".to_string()));
                }
                Predicate::ParamLengthAtLeast { min, source }
            }
            "header_present" => Predicate::HeaderPresent(value.to_string()),
            "header" => {
                let (name, pattern) = value.split_once(':').ok_or_else(|| {
                    KeyError::Syntax(format!("header pattern wants Name: regex, got {value:?}"))
                })?;
                Predicate::HeaderMatches {
                    name: name.trim().to_string(),
                    pattern: compile(pattern.trim())?,
                }
            }
            "body" => Predicate::BodyMatches(compile(value)?),
            "decoded" => Predicate::DecodedContains { needle: value.to_string(), source },
            other => return Err(KeyError::Syntax(format!("unknown match kind {other:?}"))),
        };
        rule.predicates.push(predicate);
        return Ok(());
    }
    if let Some(axis_name) = key.strip_prefix("set.") {
        return apply_assignment(&mut rule.assigns, axis_name, value, false);
    }
    match key {
        "priority" => {
            rule.priority = value
                .parse()
                .map_err(|_| KeyError::Syntax(format!("priority wants an integer, got {value:?}")))?;
        }
        "cve" => rule.cve = Some(value.to_string()),
        "describe" => rule.description = value.to_string(),
        other => return Err(KeyError::Syntax(format!("unknown rule key {other:?}"))),
    }
    Ok(())
}

fn apply_window_key(w: &mut WindowBuilder, key: &str, value: &str) -> Result<(), KeyError> {
    if let Some(axis_name) = key.strip_prefix("set.") {
        return apply_assignment(&mut w.assigns, axis_name, value, true);
    }
    match key {
        "path" => w.path = Some(compile(value)?),
        "seconds" => {
            let secs: u64 = value
                .parse()
                .map_err(|_| KeyError::Syntax(format!("seconds wants an integer, got {value:?}")))?;
            if secs == 0 {
                return Err(KeyError::Syntax("window must be longer than zero seconds".to_string()));
            }
            w.window_secs = Some(secs);
        }
        "min_repeats" => {
            let n: usize = value.parse().map_err(|_| {
                KeyError::Syntax(format!("min_repeats wants an integer, got {value:?}"))
            })?;
            if n < 2 {
                return Err(KeyError::Syntax("min_repeats must be at least 2".to_string()));
            }
            w.min_repeats = Some(n);
        }
        "fixed" => w.fixed_param = Some(compile(value)?),
        "varying" => w.varying_param = Some(compile(value)?),
        "describe" => w.description = value.to_string(),
        other => return Err(KeyError::Syntax(format!("unknown window key {other:?}"))),
    }
    Ok(())
}

fn apply_assignment(
    assigns: &mut AttackVector,
    axis_name: &str,
    value: &str,
    in_window: bool,
) -> Result<(), KeyError> {
    let axis = Axis::from_name(axis_name).ok_or_else(|| KeyError::Assignment {
        field: axis_name.to_string(),
        reason: "unknown axis".to_string(),
    })?;
    if in_window && matches!(axis, Axis::Threat | Axis::Action) {
        return Err(KeyError::Assignment {
            field: axis_name.to_string(),
            reason: "threat and action are set by the sequence trigger".to_string(),
        });
    }
    let code = parse_axis_value(axis, value).map_err(|reason| KeyError::Assignment {
        field: axis_name.to_string(),
        reason,
    })?;
    assigns
        .set_code(axis, code)
        .map_err(|e| KeyError::Assignment {
            field: axis_name.to_string(),
            reason: e.to_string(),
        })
}

/// Parses an axis value: a symbolic name or the taxonomy code. HTTP
/// element values are hex (as printed in vectors) or `|`-joined names.
fn parse_axis_value(axis: Axis, value: &str) -> Result<u8, String> {
    if axis == Axis::HttpElement {
        if value.bytes().all(|b| b.is_ascii_hexdigit()) && value.len() <= 2 {
            return u8::from_str_radix(value, 16).map_err(|e| e.to_string());
        }
        let mut bits = 0u8;
        for part in value.split('|') {
            let bit = HttpElementMask::bit_from_name(part.trim())
                .ok_or_else(|| format!("unknown element name {part:?}"))?;
            bits |= bit;
        }
        return Ok(bits);
    }
    let symbolic = match axis {
        Axis::EntryPoint => crate::taxonomy::EntryPoint::from_name(value).map(|v| v.code()),
        Axis::Vulnerability => crate::taxonomy::Vulnerability::from_name(value).map(|v| v.code()),
        Axis::Threat => crate::taxonomy::Threat::from_name(value).map(|v| v.code()),
        Axis::Action => crate::taxonomy::Action::from_name(value).map(|v| v.code()),
        Axis::Length => crate::taxonomy::LengthFlag::from_name(value).map(|v| v.code()),
        Axis::Target => crate::taxonomy::Target::from_name(value).map(|v| v.code()),
        Axis::Scope => crate::taxonomy::Scope::from_name(value).map(|v| v.code()),
        Axis::Privileges => crate::taxonomy::Privileges::from_name(value).map(|v| v.code()),
        Axis::HttpElement => unreachable!(),
    };
    if let Some(code) = symbolic {
        return Ok(code);
    }
    value
        .parse::<u8>()
        .map_err(|_| format!("not a name or code for {axis}: {value:?}"))
}
