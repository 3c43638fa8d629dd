//! Round-trip and size properties of the two vector encodings, driven
//! over the full presence-mask space with sampled field values.

use proptest::prelude::*;

use wat_core::codec::{decode_binary, encode_binary, encode_text, encoded_len, parse_text};
use wat_core::taxonomy::{AttackVector, Axis};

fn build_vector(mask: u16, codes: [u8; 9]) -> AttackVector {
    let mut v = AttackVector::partial();
    for axis in Axis::ALL {
        if mask & (1 << axis.index()) != 0 {
            v.set_code(axis, codes[axis.index()]).unwrap();
        }
    }
    v
}

fn vector_strategy() -> impl Strategy<Value = AttackVector> {
    (
        0u16..512,
        0u8..=1,
        0u8..=4,
        0u8..=5,
        0u8..=9,
        0u8..=1,
        1u8..=0x7f,
        0u8..=1,
        0u8..=1,
        0u8..=1,
    )
        .prop_map(|(mask, entry, vuln, threat, action, len, elem, target, scope, priv_)| {
            build_vector(mask, [entry, vuln, threat, action, len, elem, target, scope, priv_])
        })
}

proptest! {
    #[test]
    fn text_round_trip(v in vector_strategy()) {
        let text = encode_text(&v);
        let back = parse_text(&text).unwrap();
        prop_assert_eq!(&back, &v);
        // Canonical form: re-encoding is byte-identical.
        prop_assert_eq!(encode_text(&back), text);
    }

    #[test]
    fn binary_round_trip(v in vector_strategy()) {
        let bytes = encode_binary(&v);
        prop_assert_eq!(bytes.len(), encoded_len(v.presence_mask()));
        let back = decode_binary(&bytes).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn removing_fields_never_grows_encoding(v in vector_strategy()) {
        let len = encode_binary(&v).len();
        for axis in Axis::ALL {
            if v.is_present(axis) {
                let mut smaller = v.clone();
                smaller.clear(axis);
                prop_assert!(encode_binary(&smaller).len() <= len);
            }
        }
    }

    #[test]
    fn equal_vectors_encode_identically(v in vector_strategy()) {
        let mut twin = AttackVector::partial();
        for axis in Axis::ALL {
            if let Some(code) = v.code(axis) {
                twin.set_code(axis, code).unwrap();
            }
        }
        prop_assert_eq!(encode_text(&v), encode_text(&twin));
        prop_assert_eq!(encode_binary(&v), encode_binary(&twin));
    }
}

#[test]
fn every_presence_mask_fits_the_size_formula() {
    for mask in 0u16..512 {
        let v = build_vector(mask, [1, 4, 5, 9, 1, 0x7f, 1, 1, 1]);
        let bytes = encode_binary(&v);
        assert_eq!(bytes.len(), encoded_len(mask), "mask {mask:#b}");
        assert!(bytes.len() <= 4);
        assert!(bytes.len() >= 2);
        assert_eq!(decode_binary(&bytes).unwrap(), v);
    }
}
