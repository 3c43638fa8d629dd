//! Parsing of raw HTTP/1.x requests and access-log lines into a normalized
//! request model, plus parameter extraction with security-minded decoding.
//!
//! The parsers are deliberately forgiving: malformed input is exactly what
//! attack classification cares about, so errors carry the offending raw
//! line, request lines may lack an HTTP version, and targets may contain
//! unencoded spaces.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;

/// Where a request representation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    RawRequest,
    LogLine,
}

/// How much of the original request this representation carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completeness {
    Full,
    /// Reconstructed from a log line; most headers were never recorded, so
    /// header-based checks must abstain rather than report absence.
    HeadersUnavailable,
}

/// A normalized HTTP request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub method: String,
    /// Request path, starting with `/` or `*`. Raw, not decoded.
    pub target: String,
    /// Raw query string without the leading `?`; empty when absent.
    pub query: String,
    /// `HTTP/x.y` token, or empty for version-less request lines.
    pub version: String,
    headers: Vec<(String, String)>,
    pub body: Vec<u8>,
    pub origin: Origin,
    pub completeness: Completeness,
    /// Requesting client, when the source records one (log host field).
    pub client: Option<String>,
    /// Seconds since epoch, when the source records a time.
    pub timestamp: Option<u64>,
    /// Caller-assigned identifier (file:line and the like) used in reports.
    pub source_ref: Option<String>,
}

impl HttpRequest {
    fn empty(origin: Origin, completeness: Completeness) -> Self {
        HttpRequest {
            method: String::new(),
            target: String::new(),
            query: String::new(),
            version: String::new(),
            headers: Vec::new(),
            body: Vec::new(),
            origin,
            completeness,
            client: None,
            timestamp: None,
            source_ref: None,
        }
    }

    /// Ordered header list as parsed.
    pub fn headers(&self) -> &[(String, String)] {
        &self.headers
    }

    /// First header with the given name, case-insensitive.
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn push_header(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.headers.push((name.into(), value.into()));
    }

    /// Length of the request target plus query as transmitted
    /// (`target?query`).
    pub fn target_query_len(&self) -> usize {
        if self.query.is_empty() {
            self.target.len()
        } else {
            self.target.len() + 1 + self.query.len()
        }
    }

    /// Identifier used in classification output.
    pub fn reference(&self) -> String {
        self.source_ref
            .clone()
            .unwrap_or_else(|| format!("{} {}", self.method, self.target))
    }

    /// Serializes back to raw request bytes. Re-parsing the result yields
    /// the same method, target, query, version, headers, and body.
    pub fn to_raw_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(self.method.as_bytes());
        out.push(b' ');
        out.extend_from_slice(self.target.as_bytes());
        if !self.query.is_empty() {
            out.push(b'?');
            out.extend_from_slice(self.query.as_bytes());
        }
        if !self.version.is_empty() {
            out.push(b' ');
            out.extend_from_slice(self.version.as_bytes());
        }
        out.extend_from_slice(b"\r\n");
        for (name, value) in &self.headers {
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(b": ");
            out.extend_from_slice(value.as_bytes());
            out.extend_from_slice(b"\r\n");
        }
        out.extend_from_slice(b"\r\n");
        out.extend_from_slice(&self.body);
        out
    }
}

/// Raw-request parse failure. The offending line rides along because
/// malformed requests are themselves attack-relevant.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RequestParseError {
    #[error("malformed request line: {line:?}")]
    MalformedRequestLine { line: String },
    #[error("malformed header at line {line_no}: {line:?}")]
    MalformedHeader { line_no: usize, line: String },
}

/// Log-line parse failure.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed log line: {reason}")]
pub struct MalformedLogLine {
    pub reason: String,
}

/// Splits head from body at the first blank line. The trailing line
/// terminator is trimmed from the head.
fn split_head_body(data: &[u8]) -> (&[u8], &[u8]) {
    let mut i = 0;
    while i < data.len() {
        if data[i] == b'\n' {
            let mut head = &data[..i];
            if head.ends_with(b"\r") {
                head = &head[..head.len() - 1];
            }
            let rest = &data[i + 1..];
            if let Some(body) = rest.strip_prefix(b"\n" as &[u8]) {
                return (head, body);
            }
            if let Some(body) = rest.strip_prefix(b"\r\n" as &[u8]) {
                return (head, body);
            }
        }
        i += 1;
    }
    (data, &[])
}

/// Parses a request line into method, target, query, and version.
///
/// The version token is optional, and the target may contain raw spaces:
/// a trailing `HTTP/...` token is taken as the version, everything between
/// it and the method is the target.
fn parse_request_line(line: &str) -> Result<(String, String, String, String), RequestParseError> {
    let malformed = || RequestParseError::MalformedRequestLine {
        line: line.to_string(),
    };
    let line = line.trim_end();
    let (method, rest) = line.split_once(' ').ok_or_else(malformed)?;
    if method.is_empty() || method.bytes().any(|b| b.is_ascii_control()) {
        return Err(malformed());
    }
    let rest = rest.trim();
    if rest.is_empty() {
        return Err(malformed());
    }

    let (target_query, version) = match rest.rsplit_once(' ') {
        Some((front, last)) if last.starts_with("HTTP/") => (front.trim_end(), last),
        _ => (rest, ""),
    };
    if !(target_query.starts_with('/') || target_query.starts_with('*')) {
        return Err(malformed());
    }
    let (target, query) = match target_query.split_once('?') {
        Some((t, q)) => (t, q),
        None => (target_query, ""),
    };
    Ok((
        method.to_string(),
        target.to_string(),
        query.to_string(),
        version.to_string(),
    ))
}

/// Parses one raw HTTP/1.x request: request line, headers until a blank
/// line, remainder as body.
pub fn parse_raw_request(data: &[u8]) -> Result<HttpRequest, RequestParseError> {
    let (head, body) = split_head_body(data);
    let head = String::from_utf8_lossy(head);
    let mut lines = head.lines();
    let request_line = lines.next().unwrap_or("");
    let (method, target, query, version) = parse_request_line(request_line)?;

    let mut request = HttpRequest::empty(Origin::RawRequest, Completeness::Full);
    request.method = method;
    request.target = target;
    request.query = query;
    request.version = version;
    request.body = body.to_vec();

    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let line_no = i + 2;
        let (name, value) = line.split_once(':').ok_or(RequestParseError::MalformedHeader {
            line_no,
            line: line.to_string(),
        })?;
        let name = name.trim_end();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(RequestParseError::MalformedHeader {
                line_no,
                line: line.to_string(),
            });
        }
        request.headers.push((name.to_string(), value.trim().to_string()));
    }
    Ok(request)
}

/// Access-log flavors understood by [`parse_log_line`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Common,
    Combined,
}

fn log_line_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r#"^(\S+) (\S+) (\S+) \[([^\]]*)\] "([^"]*)" (\S+) (\S+)(?: "([^"]*)" "([^"]*)")?\s*$"#,
        )
        .unwrap()
    })
}

/// Parses a Common or Combined Log Format line into a request. The quoted
/// request field supplies method/target/query/version; the Combined format
/// additionally yields the Referer header (a `-` means none was sent).
pub fn parse_log_line(line: &str, format: LogFormat) -> Result<HttpRequest, MalformedLogLine> {
    let caps = log_line_regex()
        .captures(line.trim_end())
        .ok_or_else(|| MalformedLogLine {
            reason: format!("line does not match log grammar: {line:?}"),
        })?;

    let request_field = caps.get(5).unwrap().as_str();
    let (method, target, query, version) =
        parse_request_line(request_field).map_err(|_| MalformedLogLine {
            reason: format!("unparseable request field: {request_field:?}"),
        })?;

    let time_field = caps.get(4).unwrap().as_str();
    let timestamp = chrono::DateTime::parse_from_str(time_field, "%d/%b/%Y:%H:%M:%S %z")
        .map_err(|e| MalformedLogLine {
            reason: format!("bad timestamp {time_field:?}: {e}"),
        })?
        .timestamp();

    let mut request = HttpRequest::empty(Origin::LogLine, Completeness::HeadersUnavailable);
    request.method = method;
    request.target = target;
    request.query = query;
    request.version = version;
    request.client = Some(caps.get(1).unwrap().as_str().to_string());
    request.timestamp = u64::try_from(timestamp).ok();

    if format == LogFormat::Combined {
        match caps.get(8) {
            Some(referer) if referer.as_str() != "-" => {
                request.headers.push(("Referer".to_string(), referer.as_str().to_string()));
            }
            Some(_) => {}
            None => {
                return Err(MalformedLogLine {
                    reason: "combined format requires referer and user-agent fields".to_string(),
                })
            }
        }
    }
    Ok(request)
}

/// Splits a raw-request file into per-request byte blocks. Requests are
/// separated by lines containing exactly `%%%`.
pub fn split_raw_stream(data: &[u8]) -> Vec<&[u8]> {
    let mut blocks = Vec::new();
    let mut start = 0;
    let mut pos = 0;
    while pos < data.len() {
        let line_end = data[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| pos + i)
            .unwrap_or(data.len());
        let mut line = &data[pos..line_end];
        if let Some(stripped) = line.strip_suffix(b"\r" as &[u8]) {
            line = stripped;
        }
        if line == b"%%%" {
            blocks.push(&data[start..pos]);
            start = (line_end + 1).min(data.len());
        }
        pos = line_end + 1;
    }
    blocks.push(&data[start.min(data.len())..]);
    blocks
        .into_iter()
        .map(trim_block)
        .filter(|b| !b.is_empty())
        .collect()
}

fn trim_block(mut block: &[u8]) -> &[u8] {
    while let Some(rest) = block
        .strip_prefix(b"\n" as &[u8])
        .or_else(|| block.strip_prefix(b"\r" as &[u8]))
    {
        block = rest;
    }
    while let Some(rest) = block
        .strip_suffix(b"\n" as &[u8])
        .or_else(|| block.strip_suffix(b"\r" as &[u8]))
    {
        block = rest;
    }
    block
}

/// Where a parameter was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamSource {
    Query,
    Body,
    Cookie,
    Header,
    Path,
}

impl ParamSource {
    pub fn name(self) -> &'static str {
        match self {
            ParamSource::Query => "query",
            ParamSource::Body => "body",
            ParamSource::Cookie => "cookie",
            ParamSource::Header => "header",
            ParamSource::Path => "path",
        }
    }

    pub fn from_name(name: &str) -> Option<ParamSource> {
        match name.to_ascii_lowercase().as_str() {
            "query" => Some(ParamSource::Query),
            "body" => Some(ParamSource::Body),
            "cookie" => Some(ParamSource::Cookie),
            "header" => Some(ParamSource::Header),
            "path" => Some(ParamSource::Path),
            _ => None,
        }
    }
}

impl fmt::Display for ParamSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What the decoder had to do to produce `decoded_value`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeFlags {
    /// An overlong UTF-8 escape (`%c0%af` and friends) was normalized to
    /// its ASCII equivalent.
    pub overlong_normalized: bool,
    /// A `%` escape could not be decoded and was passed through verbatim.
    pub invalid_escape: bool,
    /// Decoded bytes were not valid UTF-8; offending bytes were replaced.
    pub invalid_utf8: bool,
}

/// One extracted parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    /// Raw name; empty for positional data such as path segments.
    pub name: String,
    /// Raw value.
    pub value: String,
    pub source: ParamSource,
    /// Name after decoding.
    pub decoded_name: String,
    /// Value after iterated percent decoding and overlong normalization.
    pub decoded_value: String,
    pub flags: DecodeFlags,
}

impl Parameter {
    /// Length of the longer decoded component. Long attack arguments show
    /// up in the name position as often as in the value position.
    pub fn argument_len(&self) -> usize {
        self.decoded_name.len().max(self.decoded_value.len())
    }
}

/// Decoding limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeConfig {
    /// Maximum percent-decoding passes. Two passes catch the known
    /// double-encoding evasions without looping on pathological input.
    pub max_iterations: u32,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig { max_iterations: 2 }
    }
}

fn hex_val(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

/// One percent-decoding pass over `input`, with overlong-UTF-8
/// normalization on the resulting bytes.
fn percent_pass(input: &str, flags: &mut DecodeFlags) -> String {
    let src = input.as_bytes();
    let mut bytes = Vec::with_capacity(src.len());
    let mut i = 0;
    while i < src.len() {
        if src[i] == b'%' {
            if let (Some(hi), Some(lo)) = (
                src.get(i + 1).copied().and_then(hex_val),
                src.get(i + 2).copied().and_then(hex_val),
            ) {
                bytes.push(hi << 4 | lo);
                i += 3;
                continue;
            }
            flags.invalid_escape = true;
        }
        bytes.push(src[i]);
        i += 1;
    }

    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        // Overlong two-byte sequences (0xc0/0xc1 lead) always name an
        // ASCII character; three-byte 0xe0 sequences can too.
        if (b == 0xc0 || b == 0xc1) && i + 1 < bytes.len() && bytes[i + 1] & 0xc0 == 0x80 {
            out.push((b & 0x1f) << 6 | (bytes[i + 1] & 0x3f));
            flags.overlong_normalized = true;
            i += 2;
            continue;
        }
        if b == 0xe0
            && i + 2 < bytes.len()
            && bytes[i + 1] & 0xc0 == 0x80
            && bytes[i + 2] & 0xc0 == 0x80
        {
            let cp = ((bytes[i + 1] & 0x3f) as u32) << 6 | (bytes[i + 2] & 0x3f) as u32;
            if cp < 0x80 {
                out.push(cp as u8);
                flags.overlong_normalized = true;
                i += 3;
                continue;
            }
        }
        out.push(b);
        i += 1;
    }

    match String::from_utf8(out) {
        Ok(s) => s,
        Err(e) => {
            flags.invalid_utf8 = true;
            String::from_utf8_lossy(e.as_bytes()).into_owned()
        }
    }
}

/// Decodes a parameter component to its fixed point, up to the configured
/// iteration limit. `plus_as_space` applies form-encoding semantics once,
/// before the percent passes.
pub fn decode_component(raw: &str, plus_as_space: bool, cfg: &DecodeConfig) -> (String, DecodeFlags) {
    let mut flags = DecodeFlags::default();
    let mut current = if plus_as_space {
        raw.replace('+', " ")
    } else {
        raw.to_string()
    };
    for _ in 0..cfg.max_iterations {
        let next = percent_pass(&current, &mut flags);
        if next == current {
            break;
        }
        current = next;
    }
    (current, flags)
}

fn push_pairs(
    out: &mut Vec<Parameter>,
    data: &str,
    source: ParamSource,
    plus_as_space: bool,
    pair_sep: char,
    cfg: &DecodeConfig,
) {
    for segment in data.split(pair_sep) {
        let segment = segment.trim();
        if segment.is_empty() {
            continue;
        }
        let (name, value) = match segment.split_once('=') {
            Some((n, v)) => (n, v),
            None => (segment, ""),
        };
        let (decoded_name, name_flags) = decode_component(name, plus_as_space, cfg);
        let (decoded_value, value_flags) = decode_component(value, plus_as_space, cfg);
        out.push(Parameter {
            name: name.to_string(),
            value: value.to_string(),
            source,
            decoded_name,
            decoded_value,
            flags: DecodeFlags {
                overlong_normalized: name_flags.overlong_normalized
                    || value_flags.overlong_normalized,
                invalid_escape: name_flags.invalid_escape || value_flags.invalid_escape,
                invalid_utf8: name_flags.invalid_utf8 || value_flags.invalid_utf8,
            },
        });
    }
}

fn body_is_form_encoded(r: &HttpRequest) -> bool {
    match r.header("Content-Type") {
        None => true,
        Some(ct) => ct.to_ascii_lowercase().contains("application/x-www-form-urlencoded"),
    }
}

/// Extracts parameters from every attack-relevant location: the query
/// string, a form-encoded (or untyped) body, Cookie headers, and the path
/// segments.
pub fn extract_parameters(r: &HttpRequest, cfg: &DecodeConfig) -> Vec<Parameter> {
    let mut params = Vec::new();

    if !r.query.is_empty() {
        push_pairs(&mut params, &r.query, ParamSource::Query, true, '&', cfg);
    }

    if !r.body.is_empty() && body_is_form_encoded(r) {
        let body = String::from_utf8_lossy(&r.body);
        push_pairs(&mut params, body.trim_end(), ParamSource::Body, true, '&', cfg);
    }

    for (name, value) in r.headers() {
        if name.eq_ignore_ascii_case("Cookie") {
            push_pairs(&mut params, value, ParamSource::Cookie, false, ';', cfg);
        }
    }

    let segments: Vec<&str> = r.target.split('/').filter(|s| !s.is_empty()).collect();
    if segments.is_empty() {
        let (decoded_value, flags) = decode_component(&r.target, false, cfg);
        params.push(Parameter {
            name: String::new(),
            value: r.target.clone(),
            source: ParamSource::Path,
            decoded_name: String::new(),
            decoded_value,
            flags,
        });
    } else {
        for segment in segments {
            let (decoded_value, flags) = decode_component(segment, false, cfg);
            params.push(Parameter {
                name: String::new(),
                value: segment.to_string(),
                source: ParamSource::Path,
                decoded_name: String::new(),
                decoded_value,
                flags,
            });
        }
    }

    params
}
