//! Metric axioms for the encoded-vector distance, checked in exact
//! rational arithmetic.

use num_traits::Zero;
use proptest::prelude::*;

use wat_core::analysis::{distance, DistanceWeights, Rational};
use wat_core::codec::encode_binary;
use wat_core::taxonomy::{AttackVector, Axis};

fn build_vector(mask: u16, codes: [u8; 9]) -> Vec<u8> {
    let mut v = AttackVector::partial();
    for axis in Axis::ALL {
        if mask & (1 << axis.index()) != 0 {
            v.set_code(axis, codes[axis.index()]).unwrap();
        }
    }
    encode_binary(&v)
}

fn encoded_strategy() -> impl Strategy<Value = Vec<u8>> {
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
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn metric_axioms_hold_exactly(
        a in encoded_strategy(),
        b in encoded_strategy(),
        c in encoded_strategy(),
    ) {
        let w = DistanceWeights::default();
        let dab = distance(&a, &b, &w).unwrap();
        let dba = distance(&b, &a, &w).unwrap();
        let dac = distance(&a, &c, &w).unwrap();
        let dcb = distance(&c, &b, &w).unwrap();

        // Non-negativity and symmetry.
        prop_assert!(dab >= Rational::zero());
        prop_assert_eq!(dab, dba);

        // Identity of indiscernibles on the encoded form.
        prop_assert_eq!(dab.is_zero(), a == b);
        prop_assert!(distance(&a, &a, &w).unwrap().is_zero());

        // Triangle inequality, exact.
        prop_assert!(dab <= dac + dcb);
    }
}
