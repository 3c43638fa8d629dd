//! The nine-axis web attack taxonomy.
//!
//! Each axis is a closed value set; an [`AttackVector`] holds an optional
//! value per axis. Absent axes carry no information for the attack at hand
//! and are dropped from the encoded forms, which is what makes the vectors
//! different lengths.

use std::fmt;

/// Where the attack gets through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntryPoint {
    /// Server software itself (ISAPI filters, Perl modules, ...).
    ServerSoftware = 0,
    /// The web application code (scripts, components, SQL sentences, ...).
    WebApplication = 1,
}

/// Weakness being exploited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vulnerability {
    CodeInjection = 0,
    Canonicalization = 1,
    HtmlManipulation = 2,
    Overflow = 3,
    Misconfiguration = 4,
}

/// Security property under threat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Threat {
    Authentication = 0,
    Authorization = 1,
    Confidentiality = 2,
    Integrity = 3,
    Availability = 4,
    Auditing = 5,
}

/// Concrete action realizing the threat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Read = 0,
    Modify = 1,
    Delete = 2,
    Fabricate = 3,
    Impersonate = 4,
    Bypass = 5,
    Search = 6,
    Interrupt = 7,
    Probe = 8,
    Unknown = 9,
}

/// Whether the request arguments have an expected length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LengthFlag {
    Expected = 0,
    Unexpected = 1,
}

/// Aim of the attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    /// Application data and functionality only.
    WebApplication = 0,
    /// The platform underneath: OS commands, accounts, the network.
    Platform = 1,
}

/// How many users the attack affects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    Local = 0,
    Universal = 1,
}

/// Privilege level obtained by a successful attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Privileges {
    Unprivileged = 0,
    AdministratorRoot = 1,
}

/// HTTP verbs and headers used by the attack, as a 7-bit set.
///
/// Unlike the other axes this one is not mutually exclusive: a request can
/// use several elements at once, so each element gets its own bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HttpElementMask(u8);

impl HttpElementMask {
    pub const GET_POST: u8 = 0x01;
    pub const HOST: u8 = 0x02;
    pub const COOKIE: u8 = 0x04;
    pub const REFERER: u8 = 0x08;
    pub const TRANSLATE: u8 = 0x10;
    pub const SEARCH: u8 = 0x20;
    pub const PROPFIND: u8 = 0x40;

    /// Builds a mask. An empty or over-wide bit set is not a valid mask;
    /// "no elements" is represented by leaving the axis absent.
    pub fn new(bits: u8) -> Option<Self> {
        if bits == 0 || bits > 0x7f {
            None
        } else {
            Some(HttpElementMask(bits))
        }
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, bit: u8) -> bool {
        self.0 & bit != 0
    }

    /// Union of two masks.
    pub fn union(self, other: HttpElementMask) -> HttpElementMask {
        HttpElementMask(self.0 | other.0)
    }

    /// Symbolic name for a single element bit, if it is one.
    pub fn bit_name(bit: u8) -> Option<&'static str> {
        match bit {
            Self::GET_POST => Some("get_post"),
            Self::HOST => Some("host"),
            Self::COOKIE => Some("cookie"),
            Self::REFERER => Some("referer"),
            Self::TRANSLATE => Some("translate"),
            Self::SEARCH => Some("search"),
            Self::PROPFIND => Some("propfind"),
            _ => None,
        }
    }

    /// Single element bit for a symbolic name.
    pub fn bit_from_name(name: &str) -> Option<u8> {
        match name.to_ascii_lowercase().as_str() {
            "get_post" | "get/post" => Some(Self::GET_POST),
            "host" => Some(Self::HOST),
            "cookie" => Some(Self::COOKIE),
            "referer" => Some(Self::REFERER),
            "translate" => Some(Self::TRANSLATE),
            "search" => Some(Self::SEARCH),
            "propfind" => Some(Self::PROPFIND),
            _ => None,
        }
    }
}

impl fmt::Display for HttpElementMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02x}", self.0)
    }
}

/// The nine taxonomy axes, in encoding order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    EntryPoint,
    Vulnerability,
    Threat,
    Action,
    Length,
    HttpElement,
    Target,
    Scope,
    Privileges,
}

impl Axis {
    /// All axes in encoding order.
    pub const ALL: [Axis; 9] = [
        Axis::EntryPoint,
        Axis::Vulnerability,
        Axis::Threat,
        Axis::Action,
        Axis::Length,
        Axis::HttpElement,
        Axis::Target,
        Axis::Scope,
        Axis::Privileges,
    ];

    /// Position in encoding order, 0-based.
    pub fn index(self) -> usize {
        match self {
            Axis::EntryPoint => 0,
            Axis::Vulnerability => 1,
            Axis::Threat => 2,
            Axis::Action => 3,
            Axis::Length => 4,
            Axis::HttpElement => 5,
            Axis::Target => 6,
            Axis::Scope => 7,
            Axis::Privileges => 8,
        }
    }

    /// Bits of information the axis carries in the binary encoding.
    pub fn bit_width(self) -> u32 {
        match self {
            Axis::EntryPoint => 1,
            Axis::Vulnerability => 3,
            Axis::Threat => 3,
            Axis::Action => 4,
            Axis::Length => 1,
            Axis::HttpElement => 7,
            Axis::Target => 1,
            Axis::Scope => 1,
            Axis::Privileges => 1,
        }
    }

    /// Largest admissible raw code for the axis.
    pub fn max_code(self) -> u8 {
        match self {
            Axis::EntryPoint | Axis::Length | Axis::Target | Axis::Scope | Axis::Privileges => 1,
            Axis::Vulnerability => 4,
            Axis::Threat => 5,
            Axis::Action => 9,
            Axis::HttpElement => 0x7f,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::EntryPoint => "entry_point",
            Axis::Vulnerability => "vulnerability",
            Axis::Threat => "threat",
            Axis::Action => "action",
            Axis::Length => "length",
            Axis::HttpElement => "http_element",
            Axis::Target => "target",
            Axis::Scope => "scope",
            Axis::Privileges => "privileges",
        }
    }

    pub fn from_name(name: &str) -> Option<Axis> {
        Axis::ALL.iter().copied().find(|a| a.name() == name)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Bit width of every axis, in encoding order. The widths sum to
/// [`TOTAL_PAYLOAD_BITS`].
pub fn field_widths() -> [(Axis, u32); 9] {
    let mut out = [(Axis::EntryPoint, 0); 9];
    for (slot, axis) in out.iter_mut().zip(Axis::ALL) {
        *slot = (axis, axis.bit_width());
    }
    out
}

/// Payload bits of a vector with every axis present.
pub const TOTAL_PAYLOAD_BITS: u32 = 22;

macro_rules! code_impls {
    ($($ty:ident { $($variant:ident = $code:expr, $name:expr;)+ })+) => {
        $(impl $ty {
            /// Value for a raw taxonomy code.
            pub fn from_code(code: u8) -> Option<Self> {
                match code {
                    $($code => Some($ty::$variant),)+
                    _ => None,
                }
            }

            /// Raw taxonomy code.
            pub fn code(self) -> u8 {
                self as u8
            }

            /// Symbolic name used in rule files and reports.
            pub fn name(self) -> &'static str {
                match self {
                    $($ty::$variant => $name,)+
                }
            }

            /// Value for a symbolic name (case-insensitive).
            pub fn from_name(name: &str) -> Option<Self> {
                match name.to_ascii_lowercase().as_str() {
                    $($name => Some($ty::$variant),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        })+
    };
}

code_impls! {
    EntryPoint {
        ServerSoftware = 0, "server_software";
        WebApplication = 1, "web_application";
    }
    Vulnerability {
        CodeInjection = 0, "code_injection";
        Canonicalization = 1, "canonicalization";
        HtmlManipulation = 2, "html_manipulation";
        Overflow = 3, "overflow";
        Misconfiguration = 4, "misconfiguration";
    }
    Threat {
        Authentication = 0, "authentication";
        Authorization = 1, "authorization";
        Confidentiality = 2, "confidentiality";
        Integrity = 3, "integrity";
        Availability = 4, "availability";
        Auditing = 5, "auditing";
    }
    Action {
        Read = 0, "read";
        Modify = 1, "modify";
        Delete = 2, "delete";
        Fabricate = 3, "fabricate";
        Impersonate = 4, "impersonate";
        Bypass = 5, "bypass";
        Search = 6, "search";
        Interrupt = 7, "interrupt";
        Probe = 8, "probe";
        Unknown = 9, "unknown";
    }
    LengthFlag {
        Expected = 0, "expected";
        Unexpected = 1, "unexpected";
    }
    Target {
        WebApplication = 0, "web_application";
        Platform = 1, "platform";
    }
    Scope {
        Local = 0, "local";
        Universal = 1, "universal";
    }
    Privileges {
        Unprivileged = 0, "unprivileged";
        AdministratorRoot = 1, "administrator";
    }
}

/// A nine-axis attack description. Absent axes are not applicable to, or
/// not yet determined for, the attack.
///
/// A vector is either *declared complete* (the default; the threat and
/// action axes are then mandatory) or *declared partial* while a classifier
/// is still filling it in. The declaration only affects validation;
/// equality and the encoded forms look at the nine axis values alone.
#[derive(Debug, Clone, Default)]
pub struct AttackVector {
    pub entry_point: Option<EntryPoint>,
    pub vulnerability: Option<Vulnerability>,
    pub threat: Option<Threat>,
    pub action: Option<Action>,
    pub length: Option<LengthFlag>,
    pub http_element: Option<HttpElementMask>,
    pub target: Option<Target>,
    pub scope: Option<Scope>,
    pub privileges: Option<Privileges>,
    /// Declares the vector as still being filled in, which exempts it
    /// from the completeness check. Not part of equality.
    pub declared_partial: bool,
}

impl PartialEq for AttackVector {
    fn eq(&self, other: &Self) -> bool {
        self.entry_point == other.entry_point
            && self.vulnerability == other.vulnerability
            && self.threat == other.threat
            && self.action == other.action
            && self.length == other.length
            && self.http_element == other.http_element
            && self.target == other.target
            && self.scope == other.scope
            && self.privileges == other.privileges
    }
}

impl Eq for AttackVector {}

impl std::hash::Hash for AttackVector {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for axis in Axis::ALL {
            self.code(axis).hash(state);
        }
    }
}

impl AttackVector {
    /// Empty vector declared complete; validation will demand threat and
    /// action.
    pub fn new() -> Self {
        Self::default()
    }

    /// Empty vector declared partial, for incremental classification.
    pub fn partial() -> Self {
        AttackVector {
            declared_partial: true,
            ..Self::default()
        }
    }

    /// Raw code carried on an axis, if present.
    pub fn code(&self, axis: Axis) -> Option<u8> {
        match axis {
            Axis::EntryPoint => self.entry_point.map(EntryPoint::code),
            Axis::Vulnerability => self.vulnerability.map(Vulnerability::code),
            Axis::Threat => self.threat.map(Threat::code),
            Axis::Action => self.action.map(Action::code),
            Axis::Length => self.length.map(LengthFlag::code),
            Axis::HttpElement => self.http_element.map(HttpElementMask::bits),
            Axis::Target => self.target.map(Target::code),
            Axis::Scope => self.scope.map(Scope::code),
            Axis::Privileges => self.privileges.map(Privileges::code),
        }
    }

    /// Sets an axis from a raw code, rejecting out-of-range values.
    pub fn set_code(&mut self, axis: Axis, code: u8) -> Result<(), InvalidFieldValue> {
        let err = || InvalidFieldValue { axis, code };
        match axis {
            Axis::EntryPoint => self.entry_point = Some(EntryPoint::from_code(code).ok_or_else(err)?),
            Axis::Vulnerability => {
                self.vulnerability = Some(Vulnerability::from_code(code).ok_or_else(err)?)
            }
            Axis::Threat => self.threat = Some(Threat::from_code(code).ok_or_else(err)?),
            Axis::Action => self.action = Some(Action::from_code(code).ok_or_else(err)?),
            Axis::Length => self.length = Some(LengthFlag::from_code(code).ok_or_else(err)?),
            Axis::HttpElement => self.http_element = Some(HttpElementMask::new(code).ok_or_else(err)?),
            Axis::Target => self.target = Some(Target::from_code(code).ok_or_else(err)?),
            Axis::Scope => self.scope = Some(Scope::from_code(code).ok_or_else(err)?),
            Axis::Privileges => self.privileges = Some(Privileges::from_code(code).ok_or_else(err)?),
        }
        Ok(())
    }

    /// Clears an axis.
    pub fn clear(&mut self, axis: Axis) {
        match axis {
            Axis::EntryPoint => self.entry_point = None,
            Axis::Vulnerability => self.vulnerability = None,
            Axis::Threat => self.threat = None,
            Axis::Action => self.action = None,
            Axis::Length => self.length = None,
            Axis::HttpElement => self.http_element = None,
            Axis::Target => self.target = None,
            Axis::Scope => self.scope = None,
            Axis::Privileges => self.privileges = None,
        }
    }

    pub fn is_present(&self, axis: Axis) -> bool {
        self.code(axis).is_some()
    }

    /// Axes carried by this vector, in encoding order.
    pub fn present_axes(&self) -> impl Iterator<Item = Axis> + '_ {
        Axis::ALL.into_iter().filter(|a| self.is_present(*a))
    }

    /// Presence bitmap; bit i corresponds to `Axis::ALL[i]`.
    pub fn presence_mask(&self) -> u16 {
        let mut mask = 0u16;
        for axis in Axis::ALL {
            if self.is_present(axis) {
                mask |= 1 << axis.index();
            }
        }
        mask
    }

    /// True when the mandatory threat and action axes are both present.
    pub fn is_complete(&self) -> bool {
        self.threat.is_some() && self.action.is_some()
    }
}

/// A raw code that does not fit its axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("value {code} out of range for axis {axis}")]
pub struct InvalidFieldValue {
    pub axis: Axis,
    pub code: u8,
}

/// How much of the taxonomy contract `validate` enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    /// Range and completeness checks only.
    #[default]
    Lenient,
    /// Additionally requires the privileges axis to appear only on
    /// authentication threats. The published example vectors do not all
    /// honour this, so it is opt-in.
    Strict,
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub axis: Axis,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// Mandatory axis absent from a vector declared complete.
    MissingRequiredField,
    /// Privileges present while the threat is not authentication.
    PrivilegesWithoutAuthentication,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::MissingRequiredField => {
                write!(f, "{}: required field missing", self.axis)
            }
            ViolationKind::PrivilegesWithoutAuthentication => write!(
                f,
                "{}: only applicable when the threat is authentication",
                self.axis
            ),
        }
    }
}

/// Outcome of validating a vector. Violations are data, not errors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a vector against the taxonomy invariants.
///
/// Range invariants hold by construction, so lenient mode only checks that
/// a vector declared complete carries the two mandatory axes. Strict mode
/// adds the privileges applicability rule.
pub fn validate(v: &AttackVector, mode: ValidationMode) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !v.declared_partial {
        if v.threat.is_none() {
            report.violations.push(Violation {
                axis: Axis::Threat,
                kind: ViolationKind::MissingRequiredField,
            });
        }
        if v.action.is_none() {
            report.violations.push(Violation {
                axis: Axis::Action,
                kind: ViolationKind::MissingRequiredField,
            });
        }
    }
    if mode == ValidationMode::Strict
        && v.privileges.is_some()
        && v.threat != Some(Threat::Authentication)
    {
        report.violations.push(Violation {
            axis: Axis::Privileges,
            kind: ViolationKind::PrivilegesWithoutAuthentication,
        });
    }
    report
}
