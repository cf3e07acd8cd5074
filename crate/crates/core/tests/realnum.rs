use dioph::realnum::{compare, Comparison, Dyadic, DyadicInterval};
use dioph::RealExpr;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = RealExpr> {
    prop_oneof![
        (-20i64..=20).prop_map(RealExpr::int),
        (1i64..=60, 2u32..=4).prop_map(|(n, k)| RealExpr::int_root(n, k).unwrap()),
    ]
}

fn expr() -> impl Strategy<Value = RealExpr> {
    leaf().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| RealExpr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| RealExpr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| RealExpr::mul(a, b)),
            (inner, 2i64..=30).prop_map(|(a, n)| RealExpr::div(a, RealExpr::sqrt_int(n).unwrap()).unwrap()),
        ]
    })
}

fn ulp(bits: u32) -> Dyadic {
    Dyadic::new(BigInt::from(1), -(bits as i64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_is_monotone(e in expr(), p in 4u32..120, extra in 1u32..80) {
        let coarse = e.eval(p).unwrap();
        let fine = e.eval(p + extra).unwrap();
        prop_assert!(fine.width() <= ulp(p + extra));
        prop_assert!(coarse.width() <= ulp(p));
        let slack = ulp(p + extra);
        prop_assert!(fine.lower() >= &(coarse.lower() - &slack));
        prop_assert!(fine.upper() <= &(coarse.upper() + &slack));
    }

    #[test]
    fn compare_is_antisymmetric(a in expr(), b in expr()) {
        let ab = compare(&a, &b, 512).unwrap();
        let ba = compare(&b, &a, 512).unwrap();
        match ab {
            Comparison::Less => prop_assert_eq!(ba, Comparison::Greater),
            Comparison::Greater => prop_assert_eq!(ba, Comparison::Less),
            Comparison::Undecided { .. } => {
                let undecided = matches!(ba, Comparison::Undecided { .. });
                prop_assert!(undecided);
            }
        }
    }

    #[test]
    fn compare_agrees_with_enclosures(a in expr(), b in expr()) {
        let x = a.eval(200).unwrap();
        let y = b.eval(200).unwrap();
        match compare(&a, &b, 512).unwrap() {
            Comparison::Less => prop_assert!(x.lower() < y.upper()),
            Comparison::Greater => prop_assert!(y.lower() < x.upper()),
            Comparison::Undecided { .. } => prop_assert!(!x.certainly_lt(&y) && !y.certainly_lt(&x)),
        }
    }
}

/// `d * 10^-50` with the truncation error folded in.
fn decimal50(digits: &str) -> (BigRational, BigRational) {
    let d: BigInt = digits.replace('.', "").parse().unwrap();
    let scale = BigInt::from(10).pow(50);
    (
        BigRational::new(d.clone() - 1, scale.clone()),
        BigRational::new(d + 1, scale),
    )
}

fn overlaps(iv: &DyadicInterval, lo: &BigRational, hi: &BigRational) -> bool {
    &iv.lower().to_rational() <= hi && &iv.upper().to_rational() >= lo
}

#[test]
fn sound_against_fifty_digit_constants() {
    let cases = [
        (RealExpr::int_root(2, 2).unwrap(), "1.41421356237309504880168872420969807856967187537694"),
        (RealExpr::int_root(5, 2).unwrap(), "2.23606797749978969640917366873127623544061835961152"),
        (RealExpr::int_root(2, 3).unwrap(), "1.25992104989487316476721060727822835057025146470150"),
    ];
    for (e, digits) in cases {
        let (lo, hi) = decimal50(digits);
        for p in [1, 2, 3, 8, 16, 31, 64, 100, 128, 160, 200, 300, 1000] {
            let iv = e.eval(p).unwrap();
            assert!(overlaps(&iv, &lo, &hi), "{e} at {p} bits: {iv:?}");
        }
        // once narrower than the oracle, the enclosure sits inside it
        let iv = e.eval(400).unwrap();
        assert!(iv.lower().to_rational() >= lo && iv.upper().to_rational() <= hi);
    }
}

#[test]
fn ties_fail_loudly() {
    let two = RealExpr::mul(RealExpr::sqrt_int(2).unwrap(), RealExpr::sqrt_int(2).unwrap());
    assert!(matches!(compare(&two, &RealExpr::int(2), 256).unwrap(), Comparison::Undecided { .. }));
    assert!(matches!(two.floor(&dioph::Precision::with_cap(512)), Err(dioph::Error::PrecisionExhausted { .. })));
}
