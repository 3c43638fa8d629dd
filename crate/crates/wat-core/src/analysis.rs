//! Distance, clustering, and severity over encoded vectors.
//!
//! Everything here reads the binary records directly with mask and width
//! arithmetic; nothing is decoded back into taxonomy objects, which keeps
//! stored streams usable without decompression. Distances are exact
//! rationals so the metric axioms hold with no tolerance.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::codec::encoded_len;
use crate::taxonomy::Axis;

/// Exact rational number used for distances and severity scores.
pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("invalid encoding: {reason}")]
    InvalidEncoding { reason: String },
    #[error("severity needs a threat axis, but the vector has none")]
    MissingThreat,
    #[error("invalid distance weights: {0}")]
    InvalidWeights(String),
    #[error("invalid severity policy: {0}")]
    InvalidPolicy(String),
    #[error("link threshold must lie in [0, 1], got {0}")]
    ThresholdOutOfRange(Rational),
}

/// Raw per-axis view of an encoded record: presence mask plus field codes.
/// Field values stay plain integers; no taxonomy objects are built.
#[derive(Debug, Clone, Copy)]
struct EncodedFields {
    mask: u16,
    values: [u8; 9],
}

impl EncodedFields {
    fn get(&self, axis: Axis) -> Option<u8> {
        if self.mask & (1 << axis.index()) != 0 {
            Some(self.values[axis.index()])
        } else {
            None
        }
    }
}

fn bit_at(bytes: &[u8], pos: usize) -> u8 {
    (bytes[pos / 8] >> (7 - (pos % 8))) & 1
}

/// Walks an encoded record and validates it: exact length, field ranges,
/// zero padding.
fn read_fields(bytes: &[u8]) -> Result<EncodedFields, AnalysisError> {
    let invalid = |reason: String| AnalysisError::InvalidEncoding { reason };
    if bytes.len() < 2 {
        return Err(invalid(format!("record of {} bytes is shorter than the mask", bytes.len())));
    }
    let mut mask = 0u16;
    for i in 0..9 {
        mask |= (bit_at(bytes, i) as u16) << i;
    }
    let expected = encoded_len(mask);
    if bytes.len() != expected {
        return Err(invalid(format!(
            "record is {} bytes, mask says {expected}",
            bytes.len()
        )));
    }

    let mut values = [0u8; 9];
    let mut pos = 9;
    for axis in Axis::ALL {
        if mask & (1 << axis.index()) == 0 {
            continue;
        }
        let mut value = 0u8;
        for _ in 0..axis.bit_width() {
            value = (value << 1) | bit_at(bytes, pos);
            pos += 1;
        }
        if value > axis.max_code() || (axis == Axis::HttpElement && value == 0) {
            return Err(invalid(format!("axis {axis} carries out-of-range value {value}")));
        }
        values[axis.index()] = value;
    }
    while pos < bytes.len() * 8 {
        if bit_at(bytes, pos) != 0 {
            return Err(invalid(format!("non-zero padding bit at offset {pos}")));
        }
        pos += 1;
    }
    Ok(EncodedFields { mask, values })
}

/// Per-axis weights and the cost of comparing a present axis with an
/// absent one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceWeights {
    /// Non-negative weight per axis, in encoding order; at least one must
    /// be positive.
    pub axis_weights: [Rational; 9],
    /// Axis distance when exactly one side carries the axis, in [0, 1].
    /// One half puts "unknown" midway between agreement and disagreement
    /// (and keeps the triangle inequality).
    pub absence_penalty: Rational,
}

impl Default for DistanceWeights {
    fn default() -> Self {
        DistanceWeights {
            axis_weights: [Rational::one(); 9],
            absence_penalty: Rational::new(1, 2),
        }
    }
}

impl DistanceWeights {
    pub fn axis_weight(&self, axis: Axis) -> Rational {
        self.axis_weights[axis.index()]
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.axis_weights.iter().any(|w| w.is_negative()) {
            return Err(AnalysisError::InvalidWeights("weights must be non-negative".into()));
        }
        if !self.axis_weights.iter().any(|w| w.is_positive()) {
            return Err(AnalysisError::InvalidWeights("at least one weight must be positive".into()));
        }
        if self.absence_penalty.is_negative() || self.absence_penalty > Rational::one() {
            return Err(AnalysisError::InvalidWeights("absence penalty must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

fn jaccard_distance(a: u8, b: u8) -> Rational {
    let inter = (a & b).count_ones() as i64;
    let union = (a | b).count_ones() as i64;
    Rational::new(union - inter, union)
}

/// Weighted per-axis distance between two encoded vectors.
///
/// Each axis contributes 0 when both sides agree (or both lack the axis),
/// 1 when both are present and differ, and the absence penalty when only
/// one side carries the axis. The HTTP element axis compares bit sets by
/// Jaccard distance instead of all-or-nothing. The sum is normalized by
/// the total weight, so the result lies in [0, 1].
pub fn distance(a: &[u8], b: &[u8], weights: &DistanceWeights) -> Result<Rational, AnalysisError> {
    weights.validate()?;
    let fa = read_fields(a)?;
    let fb = read_fields(b)?;
    Ok(field_distance(&fa, &fb, weights))
}

fn field_distance(fa: &EncodedFields, fb: &EncodedFields, weights: &DistanceWeights) -> Rational {
    let mut total = Rational::zero();
    let mut weight_sum = Rational::zero();
    for axis in Axis::ALL {
        let w = weights.axis_weight(axis);
        weight_sum += w;
        let d = match (fa.get(axis), fb.get(axis)) {
            (None, None) => Rational::zero(),
            (Some(_), None) | (None, Some(_)) => weights.absence_penalty,
            (Some(x), Some(y)) if axis == Axis::HttpElement => jaccard_distance(x, y),
            (Some(x), Some(y)) => {
                if x == y {
                    Rational::zero()
                } else {
                    Rational::one()
                }
            }
        };
        total += w * d;
    }
    total / weight_sum
}

/// A group of records produced by [`cluster`]. Member ids are the input
/// positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Member record ids, ascending.
    pub members: Vec<usize>,
    /// Member minimizing the summed distance to the rest; ties go to the
    /// lowest id.
    pub medoid: usize,
    /// Largest member-to-medoid distance.
    pub radius: Rational,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Single-linkage agglomerative clustering over encoded vectors: records
/// whose distance is at or below the threshold end up in one cluster,
/// transitively. Empty input yields no clusters.
pub fn cluster(
    vectors: &[Vec<u8>],
    link_threshold: Rational,
    weights: &DistanceWeights,
) -> Result<Vec<Cluster>, AnalysisError> {
    if link_threshold.is_negative() || link_threshold > Rational::one() {
        return Err(AnalysisError::ThresholdOutOfRange(link_threshold));
    }
    weights.validate()?;
    let fields: Vec<EncodedFields> = vectors
        .iter()
        .map(|v| read_fields(v))
        .collect::<Result<_, _>>()?;

    // Single linkage: merging while the minimum inter-cluster distance
    // stays within the threshold is exactly transitive closure over
    // in-threshold pairs.
    let mut uf = UnionFind::new(fields.len());
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            if field_distance(&fields[i], &fields[j], weights) <= link_threshold {
                uf.union(i, j);
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..fields.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }

    let mut clusters = Vec::with_capacity(groups.len());
    for (_, members) in groups {
        let mut medoid = members[0];
        let mut best_sum: Option<Rational> = None;
        for &candidate in &members {
            let sum: Rational = members
                .iter()
                .filter(|&&other| other != candidate)
                .map(|&other| field_distance(&fields[candidate], &fields[other], weights))
                .sum();
            if best_sum.as_ref().is_none_or(|best| sum < *best) {
                best_sum = Some(sum);
                medoid = candidate;
            }
        }
        let radius = members
            .iter()
            .map(|&m| field_distance(&fields[m], &fields[medoid], weights))
            .max()
            .unwrap_or_else(Rational::zero);
        clusters.push(Cluster { members, medoid, radius });
    }
    Ok(clusters)
}

/// Severity classes derived from the score cutpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SeverityLevel {
    Low,
    Medium,
    High,
}

impl SeverityLevel {
    pub fn name(self) -> &'static str {
        match self {
            SeverityLevel::Low => "Low",
            SeverityLevel::Medium => "Medium",
            SeverityLevel::High => "High",
        }
    }
}

impl std::fmt::Display for SeverityLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Additive severity scoring: a base score per threat, bonuses for the
/// aggravating axis values, normalized into [0, 1] and bucketed by
/// cutpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeverityPolicy {
    /// Base score per threat code (authentication through auditing).
    pub base: [Rational; 6],
    /// Added when the target is the platform.
    pub bonus_platform: Rational,
    /// Added when the scope is universal.
    pub bonus_universal: Rational,
    /// Added when administrator privileges are obtained.
    pub bonus_admin: Rational,
    /// Added when the request length is unexpected.
    pub bonus_long: Rational,
    /// Raw score divisor; scores cap at 1.
    pub scale: Rational,
    /// Scores below this are Low.
    pub low_cut: Rational,
    /// Scores from `low_cut` up to this are Medium; at or above, High.
    pub high_cut: Rational,
}

impl Default for SeverityPolicy {
    fn default() -> Self {
        let r = |n: i64| Rational::from_integer(n);
        SeverityPolicy {
            base: [r(3), r(4), r(3), r(3), r(4), r(2)],
            bonus_platform: r(2),
            bonus_universal: r(2),
            bonus_admin: r(3),
            bonus_long: r(1),
            scale: r(10),
            low_cut: Rational::new(34, 100),
            high_cut: Rational::new(67, 100),
        }
    }
}

impl SeverityPolicy {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let bonuses = [
            self.bonus_platform,
            self.bonus_universal,
            self.bonus_admin,
            self.bonus_long,
        ];
        if bonuses.iter().any(|b| b.is_negative()) {
            return Err(AnalysisError::InvalidPolicy("bonuses must be non-negative".into()));
        }
        if !self.scale.is_positive() {
            return Err(AnalysisError::InvalidPolicy("scale must be positive".into()));
        }
        if self.low_cut >= self.high_cut {
            return Err(AnalysisError::InvalidPolicy(
                "cutpoints must be strictly increasing".into(),
            ));
        }
        if self.low_cut.is_negative() || self.high_cut > Rational::one() {
            return Err(AnalysisError::InvalidPolicy("cutpoints must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn level(&self, score: Rational) -> SeverityLevel {
        if score < self.low_cut {
            SeverityLevel::Low
        } else if score < self.high_cut {
            SeverityLevel::Medium
        } else {
            SeverityLevel::High
        }
    }
}

/// Scores an encoded vector. Absent axes contribute nothing; a vector
/// without a threat axis cannot be scored.
pub fn severity(
    encoded: &[u8],
    policy: &SeverityPolicy,
) -> Result<(Rational, SeverityLevel), AnalysisError> {
    policy.validate()?;
    let fields = read_fields(encoded)?;
    let threat = fields.get(Axis::Threat).ok_or(AnalysisError::MissingThreat)?;

    let mut raw = policy.base[threat as usize];
    if fields.get(Axis::Target) == Some(1) {
        raw += policy.bonus_platform;
    }
    if fields.get(Axis::Scope) == Some(1) {
        raw += policy.bonus_universal;
    }
    if fields.get(Axis::Privileges) == Some(1) {
        raw += policy.bonus_admin;
    }
    if fields.get(Axis::Length) == Some(1) {
        raw += policy.bonus_long;
    }
    let score = (raw / policy.scale).min(Rational::one());
    Ok((score, policy.level(score)))
}

/// Parses a plain decimal string (`"0.5"`, `"3"`, `"1.25"`) into an exact
/// rational. Config files use this so that configured weights stay exact.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let mut numerator: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let mut denominator: i64 = 1;
    for digit in frac_part.bytes() {
        numerator = numerator.checked_mul(10)?.checked_add((digit - b'0') as i64)?;
        denominator = denominator.checked_mul(10)?;
    }
    Some(Rational::new(numerator, denominator))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode_count, encode_binary, parse_text};

    fn enc(text: &str) -> Vec<u8> {
        encode_binary(&parse_text(text).unwrap())
    }

    /// All twenty published vectors, errata corrected.
    pub(crate) fn corpus_vectors() -> Vec<Vec<u8>> {
        [
            "{0, X, 1, 9, 0, 01, 1, X, 0}", // 1
            "{0, 1, 2, 0, 0, 01, 0, X, X}", // 2
            "{0, 3, 1, 9, 1, 01, 1, X, X}", // 3
            "{0, X, 2, 0, 0, 01, 0, X, X}", // 4
            "{0, X, 3, 1, 0, 03, 1, X, X}", // 5
            "{0, X, 0, 5, 0, 01, 0, X, 0}", // 6
            "{0, 3, 1, 9, 1, 01, 1, X, X}", // 7
            "{0, 1, 2, 0, 0, 01, 0, X, X}", // 8
            "{0, 3, 4, 7, 1, 01, 0, 1, X}", // 9
            "{1, X, 0, 6, 0, 01, 0, 0, 0}", // 10
            "{1, 0, 3, 2, 0, 01, 0, 1, X}", // 11
            "{0, 1, 2, 0, 0, 01, 1, X, 0}", // 12
            "{1, 0, 0, 4, 0, 01, 0, 0, 0}", // 13
            "{0, X, 2, 0, 0, 01, 0, X, X}", // 14
            "{1, 4, 2, 8, 0, 01, 0, X, X}", // 15
            "{0, 0, 1, 8, 0, 01, 0, 0, X}", // 16 (corrected)
            "{0, X, 2, 0, 0, 40, 0, X, X}", // 17
            "{0, 3, 4, 7, 1, 20, 0, 1, X}", // 18 (corrected)
            "{0, 3, 4, 7, 1, 01, 0, 1, X}", // 19
            "{1, 0, 1, 3, 0, 01, 1, X, 0}", // 20
        ]
        .iter()
        .map(|t| enc(t))
        .collect()
    }

    #[test]
    fn identical_published_vectors_are_at_distance_zero() {
        let w = DistanceWeights::default();
        let three = enc("{0, 3, 1, 9, 1, 01, 1, X, X}");
        let seven = enc("{0, 3, 1, 9, 1, 01, 1, X, X}");
        assert_eq!(distance(&three, &seven, &w).unwrap(), Rational::zero());
        assert_eq!(distance(&three, &three, &w).unwrap(), Rational::zero());
    }

    #[test]
    fn distance_matches_hand_computation() {
        // Coordinates compared one at a time between the first and ninth
        // published vectors, straight off the axis rules:
        //   entry 0=0 -> 0          vuln X vs 3 -> 1/2
        //   threat 1 vs 4 -> 1      action 9 vs 7 -> 1
        //   length 0 vs 1 -> 1      element 01 = 01 -> 0
        //   target 1 vs 0 -> 1      scope X vs 1 -> 1/2
        //   priv 0 vs X -> 1/2
        let coords = [
            Rational::zero(),
            Rational::new(1, 2),
            Rational::one(),
            Rational::one(),
            Rational::one(),
            Rational::zero(),
            Rational::one(),
            Rational::new(1, 2),
            Rational::new(1, 2),
        ];
        let expected: Rational = coords.iter().sum::<Rational>() / Rational::from_integer(9);
        assert_eq!(expected, Rational::new(11, 18));

        let one = enc("{0, X, 1, 9, 0, 01, 1, X, 0}");
        let nine = enc("{0, 3, 4, 7, 1, 01, 0, 1, X}");
        let d = distance(&one, &nine, &DistanceWeights::default()).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn element_axis_uses_jaccard() {
        let w = DistanceWeights::default();
        // Masks 01 and 03 share one of two elements: distance 1/2 on that
        // axis, all other axes equal.
        let a = enc("{0, X, 3, 1, 0, 01, 1, X, X}");
        let b = enc("{0, X, 3, 1, 0, 03, 1, X, X}");
        let d = distance(&a, &b, &w).unwrap();
        assert_eq!(d, Rational::new(1, 2) / Rational::from_integer(9));
    }

    #[test]
    fn scaling_weights_leaves_distance_unchanged() {
        let a = enc("{0, X, 1, 9, 0, 01, 1, X, 0}");
        let b = enc("{0, 3, 4, 7, 1, 01, 0, 1, X}");
        let unit = DistanceWeights::default();
        let scaled = DistanceWeights {
            axis_weights: [Rational::from_integer(7); 9],
            ..DistanceWeights::default()
        };
        assert_eq!(
            distance(&a, &b, &unit).unwrap(),
            distance(&a, &b, &scaled).unwrap()
        );
    }

    #[test]
    fn invalid_weights_rejected() {
        let a = enc("{0, X, 1, 9, 0, 01, 1, X, 0}");
        let zero = DistanceWeights {
            axis_weights: [Rational::zero(); 9],
            ..DistanceWeights::default()
        };
        assert!(matches!(
            distance(&a, &a, &zero),
            Err(AnalysisError::InvalidWeights(_))
        ));
    }

    #[test]
    fn invalid_encodings_rejected() {
        let w = DistanceWeights::default();
        let good = enc("{X, X, 2, 0, X, X, X, X, X}");
        assert!(matches!(
            distance(&[0x00], &good, &w),
            Err(AnalysisError::InvalidEncoding { .. })
        ));
        let mut bad = good.clone();
        bad.push(0);
        assert!(distance(&bad, &good, &w).is_err());
        // Threat-only record has 4 pad bits in its final byte.
        let mut bad = enc("{X, X, 2, X, X, X, X, X, X}");
        *bad.last_mut().unwrap() |= 1;
        assert!(distance(&bad, &good, &w).is_err());
    }

    #[test]
    fn clustering_groups_identical_corpus_vectors() {
        let vectors = corpus_vectors();
        let clusters = cluster(&vectors, Rational::zero(), &DistanceWeights::default()).unwrap();

        let find = |id: usize| {
            clusters
                .iter()
                .find(|c| c.members.contains(&id))
                .unwrap_or_else(|| panic!("record {id} missing"))
        };
        // 0-based ids: published pairs (3,7), (9,19), and also (2,8), (4,14).
        assert_eq!(find(2).members, vec![2, 6]);
        assert_eq!(find(8).members, vec![8, 18]);
        assert_eq!(find(1).members, vec![1, 7]);
        assert_eq!(find(3).members, vec![3, 13]);

        // Partition: every record exactly once.
        let mut seen: Vec<usize> = clusters.iter().flat_map(|c| c.members.clone()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..vectors.len()).collect::<Vec<_>>());

        // At threshold zero every cluster is an equality class.
        for c in &clusters {
            assert_eq!(c.radius, Rational::zero());
            assert!(c.members.contains(&c.medoid));
        }
    }

    #[test]
    fn threshold_one_merges_everything() {
        let vectors = corpus_vectors();
        let clusters = cluster(&vectors, Rational::one(), &DistanceWeights::default()).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].members.len(), vectors.len());
    }

    #[test]
    fn threshold_just_below_pair_distance_keeps_singletons() {
        let a = enc("{0, X, 1, 9, 0, 01, 1, X, 0}");
        let b = enc("{0, 3, 4, 7, 1, 01, 0, 1, X}");
        let w = DistanceWeights::default();
        let d = distance(&a, &b, &w).unwrap();
        let eps = Rational::new(1, 1000);

        let clusters = cluster(&[a.clone(), b.clone()], d - eps, &w).unwrap();
        assert_eq!(clusters.len(), 2);
        let clusters = cluster(&[a, b], d, &w).unwrap();
        assert_eq!(clusters.len(), 1);
    }

    #[test]
    fn cluster_rejects_out_of_range_threshold() {
        assert!(matches!(
            cluster(&[], Rational::new(3, 2), &DistanceWeights::default()),
            Err(AnalysisError::ThresholdOutOfRange(_))
        ));
        assert!(cluster(&[], Rational::zero(), &DistanceWeights::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn clustering_never_decodes_vectors() {
        let vectors = corpus_vectors();
        let before = decode_count();
        let _ = cluster(&vectors, Rational::new(1, 4), &DistanceWeights::default()).unwrap();
        for v in &vectors {
            let _ = severity(v, &SeverityPolicy::default());
        }
        assert_eq!(decode_count(), before);
    }

    #[test]
    fn severity_of_long_availability_attack_is_high() {
        // Availability base 4, universal scope +2, unexpected length +1.
        let nine = enc("{0, 3, 4, 7, 1, 01, 0, 1, X}");
        let (score, level) = severity(&nine, &SeverityPolicy::default()).unwrap();
        assert_eq!(score, Rational::new(7, 10));
        assert_eq!(level, SeverityLevel::High);
    }

    #[test]
    fn severity_of_plain_disclosure_is_low() {
        let four = enc("{0, X, 2, 0, 0, 01, 0, X, X}");
        let (score, level) = severity(&four, &SeverityPolicy::default()).unwrap();
        assert_eq!(score, Rational::new(3, 10));
        assert_eq!(level, SeverityLevel::Low);
    }

    #[test]
    fn severity_requires_threat() {
        let no_threat = enc("{0, X, X, 9, 0, 01, 1, X, 0}");
        assert_eq!(
            severity(&no_threat, &SeverityPolicy::default()),
            Err(AnalysisError::MissingThreat)
        );
    }

    #[test]
    fn severity_is_monotone_in_bonus_axes() {
        let policy = SeverityPolicy::default();
        let base = enc("{0, X, 0, 5, X, X, X, X, X}");
        let (base_score, _) = severity(&base, &policy).unwrap();
        for bumped in [
            "{0, X, 0, 5, 1, X, X, X, X}",
            "{0, X, 0, 5, X, X, 1, X, X}",
            "{0, X, 0, 5, X, X, X, 1, X}",
            "{0, X, 0, 5, X, X, X, X, 1}",
        ] {
            let (score, _) = severity(&enc(bumped), &policy).unwrap();
            assert!(score >= base_score, "bonus axis lowered the score for {bumped}");
        }
    }

    #[test]
    fn severity_score_caps_at_one() {
        let policy = SeverityPolicy {
            scale: Rational::from_integer(4),
            ..SeverityPolicy::default()
        };
        let worst = enc("{1, 0, 1, 3, 1, 01, 1, 1, 1}");
        let (score, level) = severity(&worst, &policy).unwrap();
        assert_eq!(score, Rational::one());
        assert_eq!(level, SeverityLevel::High);
    }

    #[test]
    fn bad_policy_rejected() {
        let policy = SeverityPolicy {
            low_cut: Rational::new(9, 10),
            high_cut: Rational::new(1, 10),
            ..SeverityPolicy::default()
        };
        let v = enc("{0, X, 2, 0, 0, 01, 0, X, X}");
        assert!(matches!(
            severity(&v, &policy),
            Err(AnalysisError::InvalidPolicy(_))
        ));
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_decimal("0.5"), Some(Rational::new(1, 2)));
        assert_eq!(parse_decimal("0.34"), Some(Rational::new(17, 50)));
        assert_eq!(parse_decimal("3"), Some(Rational::from_integer(3)));
        assert_eq!(parse_decimal("1.0"), Some(Rational::one()));
        assert_eq!(parse_decimal(".25"), Some(Rational::new(1, 4)));
        assert_eq!(parse_decimal(""), None);
        assert_eq!(parse_decimal("abc"), None);
        assert_eq!(parse_decimal("-1"), None);
    }
}
