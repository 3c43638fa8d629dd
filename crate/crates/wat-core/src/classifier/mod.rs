//! Rule-driven classification of requests into attack vectors.
//!
//! A request is evaluated against every rule; the matching rules' axis
//! assignments merge by priority, and structural checks fill the axes no
//! rule spoke for: the HTTP element mask from the observed verb and
//! headers, the length flag from parameter lengths against a threshold.
//! Request sequences additionally run window triggers for attacks that
//! only show up across repeats, such as credential brute force.

mod rules;

pub use rules::{
    load_rules, parse_rules, Predicate, Rule, RuleLoadError, RuleSet, SequenceWindow,
};

use std::collections::{BTreeMap, BTreeSet};

use crate::http::{extract_parameters, DecodeConfig, HttpRequest, Parameter, ParamSource};
use crate::taxonomy::{Action, AttackVector, Axis, HttpElementMask, LengthFlag, Threat};

/// Knobs for the structural checks.
#[derive(Debug, Clone)]
pub struct ClassifierConfig {
    /// A single decoded argument at or beyond this many bytes flags the
    /// request as unusually long. Per-server tunable; 128 separates the
    /// common-length examples from the overflow ones.
    pub length_threshold: usize,
    pub decode: DecodeConfig,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            length_threshold: 128,
            decode: DecodeConfig::default(),
        }
    }
}

/// How a classification was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confidence {
    /// At least one rule matched.
    RuleMatch,
    /// No rule matched but a structural anomaly fired.
    StructuralOnly,
}

/// One predicate's match, with where and what it hit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateMatch {
    pub location: String,
    pub matched: String,
}

/// A matched rule (or sequence window) and its predicate evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleEvidence {
    pub rule_id: String,
    pub cve: Option<String>,
    pub matches: Vec<PredicateMatch>,
}

/// Who put a value on an axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldOrigin {
    Rule(String),
    Structural(&'static str),
}

/// Detail record for a structural check that contributed to the vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralFinding {
    pub check: &'static str,
    pub axis: Axis,
    pub detail: String,
}

/// A classified attack: the vector plus the evidence trail behind every
/// present axis.
#[derive(Debug, Clone)]
pub struct Classification {
    pub vector: AttackVector,
    pub matched_rules: Vec<RuleEvidence>,
    pub structural: Vec<StructuralFinding>,
    /// Origin of every present axis, in encoding order.
    pub attribution: Vec<(Axis, FieldOrigin)>,
    pub warnings: Vec<String>,
    pub confidence: Confidence,
    pub request_ref: String,
}

impl Classification {
    pub fn rule_ids(&self) -> impl Iterator<Item = &str> {
        self.matched_rules.iter().map(|m| m.rule_id.as_str())
    }

    pub fn cves(&self) -> impl Iterator<Item = &str> {
        self.matched_rules.iter().filter_map(|m| m.cve.as_deref())
    }
}

fn snippet(s: &str) -> String {
    const MAX: usize = 64;
    if s.chars().count() <= MAX {
        s.to_string()
    } else {
        let mut out: String = s.chars().take(MAX).collect();
        out.push_str("...");
        out
    }
}

fn param_location(p: &Parameter) -> String {
    if p.name.is_empty() {
        format!("{} value {:?}", p.source, snippet(&p.decoded_value))
    } else {
        format!("{} parameter {:?}", p.source, snippet(&p.decoded_name))
    }
}

fn filtered(
    params: &[Parameter],
    source: Option<ParamSource>,
) -> impl Iterator<Item = &Parameter> {
    params.iter().filter(move |p| source.is_none_or(|s| p.source == s))
}

fn evaluate(pred: &Predicate, r: &HttpRequest, params: &[Parameter]) -> Option<PredicateMatch> {
    match pred {
        Predicate::MethodEquals(m) => r.method.eq_ignore_ascii_case(m).then(|| PredicateMatch {
            location: "method".to_string(),
            matched: r.method.clone(),
        }),
        Predicate::PathMatches(re) => re.find(&r.target).map(|m| PredicateMatch {
            location: "path".to_string(),
            matched: snippet(m.as_str()),
        }),
        Predicate::QueryMatches(re) => re.find(&r.query).map(|m| PredicateMatch {
            location: "query".to_string(),
            matched: snippet(m.as_str()),
        }),
        Predicate::ParamMatches { pattern, source } => {
            filtered(params, *source).find_map(|p| {
                let composite = format!("{}={}", p.decoded_name, p.decoded_value);
                pattern.find(&composite).map(|m| PredicateMatch {
                    location: param_location(p),
                    matched: snippet(m.as_str()),
                })
            })
        }
        Predicate::ParamLengthAtLeast { min, source } => {
            filtered(params, *source)
                .find(|p| p.argument_len() >= *min)
                .map(|p| PredicateMatch {
                    location: param_location(p),
                    matched: format!("{} bytes", p.argument_len()),
                })
        }
        Predicate::HeaderPresent(name) => r.header(name).map(|_| PredicateMatch {
            location: format!("header {name}"),
            matched: "present".to_string(),
        }),
        Predicate::HeaderMatches { name, pattern } => {
            r.header(name).and_then(|value| {
                pattern.find(value).map(|m| PredicateMatch {
                    location: format!("header {name}"),
                    matched: snippet(m.as_str()),
                })
            })
        }
        Predicate::BodyMatches(re) => {
            let body = String::from_utf8_lossy(&r.body);
            re.find(&body).map(|m| PredicateMatch {
                location: "body".to_string(),
                matched: snippet(m.as_str()),
            })
        }
        Predicate::DecodedContains { needle, source } => {
            filtered(params, *source)
                .find(|p| p.decoded_value.contains(needle) || p.decoded_name.contains(needle))
                .map(|p| PredicateMatch {
                    location: param_location(p),
                    matched: needle.clone(),
                })
        }
    }
}

/// Result of the HTTP element structural check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskOutcome {
    /// Element bits derivable from the request alone; absent when nothing
    /// maps.
    pub mask: Option<HttpElementMask>,
    /// Verb with no element bit and outside the understood set.
    pub unmapped_verb: Option<String>,
    /// Host header value that does not look like an authority.
    pub anomalous_host: Option<String>,
}

fn host_is_anomalous(value: &str) -> bool {
    value.is_empty()
        || !value
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_' | ':' | '[' | ']'))
}

/// Derives the HTTP element mask from the request's verb and headers.
///
/// Verb bits: GET/POST, SEARCH, PROPFIND (HEAD is understood but has no
/// bit). A `Translate: f` header sets the translate bit. The Host bit is
/// set only when the header value is anomalous; Cookie and Referer bits
/// are left to rule participation, since those headers are routinely
/// present on benign traffic.
pub fn http_element_mask(r: &HttpRequest) -> MaskOutcome {
    let mut bits = 0u8;
    let mut unmapped_verb = None;
    match r.method.to_ascii_uppercase().as_str() {
        "GET" | "POST" => bits |= HttpElementMask::GET_POST,
        "SEARCH" => bits |= HttpElementMask::SEARCH,
        "PROPFIND" => bits |= HttpElementMask::PROPFIND,
        "HEAD" => {}
        _ => unmapped_verb = Some(r.method.clone()),
    }

    if let Some(translate) = r.header("Translate") {
        if translate.trim_start().to_ascii_lowercase().starts_with('f') {
            bits |= HttpElementMask::TRANSLATE;
        }
    }

    let anomalous_host = r
        .header("Host")
        .filter(|v| host_is_anomalous(v))
        .map(str::to_string);
    if anomalous_host.is_some() {
        bits |= HttpElementMask::HOST;
    }

    MaskOutcome {
        mask: HttpElementMask::new(bits),
        unmapped_verb,
        anomalous_host,
    }
}

/// Flags the request as unusually long when any single decoded argument
/// reaches `threshold` bytes, or the whole target-plus-query reaches four
/// times that.
pub fn length_check(params: &[Parameter], target_query_len: usize, threshold: usize) -> LengthFlag {
    length_check_detail(params, target_query_len, threshold).0
}

fn length_check_detail(
    params: &[Parameter],
    target_query_len: usize,
    threshold: usize,
) -> (LengthFlag, Option<String>) {
    for p in params {
        if p.argument_len() >= threshold {
            return (
                LengthFlag::Unexpected,
                Some(format!(
                    "{} is {} bytes (threshold {threshold})",
                    param_location(p),
                    p.argument_len()
                )),
            );
        }
    }
    if target_query_len >= 4 * threshold {
        return (
            LengthFlag::Unexpected,
            Some(format!(
                "target and query are {target_query_len} bytes (threshold {})",
                4 * threshold
            )),
        );
    }
    (LengthFlag::Expected, None)
}

fn header_participation_bits(matched: &[(&Rule, Vec<PredicateMatch>)]) -> u8 {
    let mut bits = 0u8;
    for (rule, _) in matched {
        for pred in &rule.predicates {
            if let Some(name) = pred.header_name() {
                match name.to_ascii_lowercase().as_str() {
                    "host" => bits |= HttpElementMask::HOST,
                    "cookie" => bits |= HttpElementMask::COOKIE,
                    "referer" => bits |= HttpElementMask::REFERER,
                    _ => {}
                }
            }
            if pred.source_filter() == Some(ParamSource::Cookie) {
                bits |= HttpElementMask::COOKIE;
            }
        }
    }
    bits
}

/// Classifies one request. Returns nothing for requests that match no
/// rule and trip no structural anomaly; benign traffic produces no vector
/// at all rather than an empty one.
pub fn classify(r: &HttpRequest, rules: &RuleSet, cfg: &ClassifierConfig) -> Option<Classification> {
    let params = extract_parameters(r, &cfg.decode);

    // Rules come pre-sorted by descending priority (ties by id), so the
    // first assignment to an axis wins.
    let mut matched: Vec<(&Rule, Vec<PredicateMatch>)> = Vec::new();
    'rules: for rule in rules.rules() {
        let mut matches = Vec::new();
        for pred in &rule.predicates {
            match evaluate(pred, r, &params) {
                Some(m) => matches.push(m),
                None => continue 'rules,
            }
        }
        matched.push((rule, matches));
    }

    let mut vector = AttackVector::partial();
    let mut attribution: Vec<(Axis, FieldOrigin)> = Vec::new();
    for (rule, _) in &matched {
        for axis in rule.assigns.present_axes() {
            if !vector.is_present(axis) {
                vector.set_code(axis, rule.assigns.code(axis).unwrap()).unwrap();
                attribution.push((axis, FieldOrigin::Rule(rule.id.clone())));
            }
        }
    }

    let outcome = http_element_mask(r);
    let mut warnings = Vec::new();
    if let Some(verb) = &outcome.unmapped_verb {
        warnings.push(format!("verb {verb:?} has no HTTP element bit"));
    }

    let mut structural = Vec::new();
    let mask_bits =
        outcome.mask.map_or(0, HttpElementMask::bits) | header_participation_bits(&matched);
    if !vector.is_present(Axis::HttpElement) {
        if let Some(mask) = HttpElementMask::new(mask_bits) {
            vector.http_element = Some(mask);
            attribution.push((Axis::HttpElement, FieldOrigin::Structural("http_element_mask")));
            structural.push(StructuralFinding {
                check: "http_element_mask",
                axis: Axis::HttpElement,
                detail: format!("observed elements {mask}"),
            });
        }
    }
    if let Some(host) = &outcome.anomalous_host {
        structural.push(StructuralFinding {
            check: "host_anomaly",
            axis: Axis::HttpElement,
            detail: format!("Host header value {:?}", snippet(host)),
        });
    }

    let (length_flag, length_detail) =
        length_check_detail(&params, r.target_query_len(), cfg.length_threshold);
    if !vector.is_present(Axis::Length) {
        vector.length = Some(length_flag);
        attribution.push((Axis::Length, FieldOrigin::Structural("length_check")));
        if let Some(detail) = &length_detail {
            structural.push(StructuralFinding {
                check: "length_check",
                axis: Axis::Length,
                detail: detail.clone(),
            });
        }
    }

    let anomaly = length_flag == LengthFlag::Unexpected || outcome.anomalous_host.is_some();
    let confidence = if !matched.is_empty() {
        Confidence::RuleMatch
    } else if anomaly {
        Confidence::StructuralOnly
    } else {
        return None;
    };

    vector.declared_partial = !vector.is_complete();
    attribution.sort_by_key(|(axis, _)| axis.index());

    Some(Classification {
        vector,
        matched_rules: matched
            .into_iter()
            .map(|(rule, matches)| RuleEvidence {
                rule_id: rule.id.clone(),
                cve: rule.cve.clone(),
                matches,
            })
            .collect(),
        structural,
        attribution,
        warnings,
        confidence,
        request_ref: r.reference(),
    })
}

struct WindowCandidate {
    index: usize,
    ts: u64,
    fixed: String,
    varying: String,
}

/// Classifies a time-ordered request list: per-request classifications
/// plus one sequence classification per fired window trigger.
///
/// Requests are keyed by (client, target path); timestamps are synthesized
/// from list position when a request does not carry one. The trigger and
/// the resulting vector depend only on the request set, not its order.
pub fn classify_sequence(
    requests: &[HttpRequest],
    rules: &RuleSet,
    cfg: &ClassifierConfig,
) -> Vec<Classification> {
    let mut out: Vec<Classification> = requests
        .iter()
        .filter_map(|r| classify(r, rules, cfg))
        .collect();

    for window in rules.windows() {
        let mut groups: BTreeMap<(String, String), Vec<WindowCandidate>> = BTreeMap::new();
        for (index, r) in requests.iter().enumerate() {
            if !window.path.is_match(&r.target) {
                continue;
            }
            let params = extract_parameters(r, &cfg.decode);
            let fixed = params
                .iter()
                .find(|p| window.fixed_param.is_match(&p.decoded_name))
                .map(|p| p.decoded_value.clone());
            let varying = params
                .iter()
                .find(|p| window.varying_param.is_match(&p.decoded_name))
                .map(|p| p.decoded_value.clone());
            let (Some(fixed), Some(varying)) = (fixed, varying) else {
                continue;
            };
            let key = (
                r.client.clone().unwrap_or_else(|| "-".to_string()),
                r.target.clone(),
            );
            groups.entry(key).or_default().push(WindowCandidate {
                index,
                ts: r.timestamp.unwrap_or(index as u64),
                fixed,
                varying,
            });
        }

        for ((client, target), mut candidates) in groups {
            candidates.sort_by_key(|c| (c.ts, c.index));
            let mut fired: BTreeSet<String> = BTreeSet::new();
            for start in 0..candidates.len() {
                let deadline = candidates[start].ts.saturating_add(window.window_secs);
                let mut distinct: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
                for c in candidates[start..].iter().take_while(|c| c.ts <= deadline) {
                    distinct.entry(&c.fixed).or_default().insert(&c.varying);
                }
                for (fixed, varying) in distinct {
                    if varying.len() >= window.min_repeats {
                        fired.insert(fixed.to_string());
                    }
                }
            }

            for fixed in fired {
                let members: Vec<&WindowCandidate> =
                    candidates.iter().filter(|c| c.fixed == fixed).collect();
                out.push(sequence_classification(
                    window, &client, &target, &fixed, &members, requests, cfg,
                ));
            }
        }
    }
    out
}

fn sequence_classification(
    window: &SequenceWindow,
    client: &str,
    target: &str,
    fixed: &str,
    members: &[&WindowCandidate],
    requests: &[HttpRequest],
    cfg: &ClassifierConfig,
) -> Classification {
    let mut vector = window.assigns.clone();
    let mut attribution: Vec<(Axis, FieldOrigin)> = window
        .assigns
        .present_axes()
        .map(|axis| (axis, FieldOrigin::Rule(window.id.clone())))
        .collect();

    // The trigger itself is a search for valid authentication data.
    vector.threat = Some(Threat::Authentication);
    vector.action = Some(Action::Search);
    attribution.push((Axis::Threat, FieldOrigin::Rule(window.id.clone())));
    attribution.push((Axis::Action, FieldOrigin::Rule(window.id.clone())));

    let mut mask_bits = 0u8;
    let mut any_long = false;
    for member in members {
        let r = &requests[member.index];
        mask_bits |= http_element_mask(r).mask.map_or(0, HttpElementMask::bits);
        let params = extract_parameters(r, &cfg.decode);
        any_long |= length_check(&params, r.target_query_len(), cfg.length_threshold)
            == LengthFlag::Unexpected;
    }

    let mut structural = Vec::new();
    if !vector.is_present(Axis::HttpElement) {
        if let Some(mask) = HttpElementMask::new(mask_bits) {
            vector.http_element = Some(mask);
            attribution.push((Axis::HttpElement, FieldOrigin::Structural("http_element_mask")));
            structural.push(StructuralFinding {
                check: "http_element_mask",
                axis: Axis::HttpElement,
                detail: format!("observed elements {mask}"),
            });
        }
    }
    if !vector.is_present(Axis::Length) {
        vector.length = Some(if any_long {
            LengthFlag::Unexpected
        } else {
            LengthFlag::Expected
        });
        attribution.push((Axis::Length, FieldOrigin::Structural("length_check")));
    }

    vector.declared_partial = !vector.is_complete();
    attribution.sort_by_key(|(axis, _)| axis.index());

    let mut matches: Vec<PredicateMatch> = members
        .iter()
        .map(|m| PredicateMatch {
            location: requests[m.index].reference(),
            matched: format!("varying value {:?}", snippet(&m.varying)),
        })
        .collect();
    matches.sort_by(|a, b| (&a.location, &a.matched).cmp(&(&b.location, &b.matched)));

    Classification {
        vector,
        matched_rules: vec![RuleEvidence {
            rule_id: window.id.clone(),
            cve: None,
            matches,
        }],
        structural,
        attribution,
        warnings: Vec::new(),
        confidence: Confidence::RuleMatch,
        request_ref: format!("window {} client {client} path {target} fixed {fixed:?}", window.id),
    }
}
