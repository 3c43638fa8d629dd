//! Priority resolution: whenever two rules assign the same axis, the
//! merged vector carries the higher-priority rule's value, with ties
//! going to the lexicographically smaller id.

use proptest::prelude::*;

use wat_core::classifier::{classify, parse_rules, ClassifierConfig};
use wat_core::http::parse_raw_request;
use wat_core::taxonomy::Axis;

fn axis_and_codes() -> impl Strategy<Value = (Axis, u8, u8)> {
    (0usize..9).prop_flat_map(|i| {
        let axis = Axis::ALL[i];
        let max = if axis == Axis::HttpElement { 0x7f } else { axis.max_code() };
        let min = if axis == Axis::HttpElement { 1 } else { 0 };
        (Just(axis), min..=max, min..=max)
    })
}

fn axis_value(axis: Axis, code: u8) -> String {
    if axis == Axis::HttpElement {
        format!("{code:02x}")
    } else {
        code.to_string()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn higher_priority_value_wins(
        (axis, code_a, code_b) in axis_and_codes(),
        prio_a in -20i32..20,
        prio_b in -20i32..20,
    ) {
        let text = format!(
            "[rule alpha]\npriority = {prio_a}\nmatch.method = GET\nset.{axis} = {val_a}\n\n\
             [rule beta]\npriority = {prio_b}\nmatch.method = GET\nset.{axis} = {val_b}\n",
            axis = axis.name(),
            val_a = axis_value(axis, code_a),
            val_b = axis_value(axis, code_b),
        );
        let rules = parse_rules(&text, "prop").unwrap();
        let request = parse_raw_request(b"GET /x HTTP/1.0\r\n\r\n").unwrap();
        let c = classify(&request, &rules, &ClassifierConfig::default()).unwrap();

        // "alpha" < "beta", so alpha wins ties.
        let expected = if prio_a >= prio_b { code_a } else { code_b };
        prop_assert_eq!(c.vector.code(axis), Some(expected));
        prop_assert_eq!(c.matched_rules.len(), 2);
    }
}
