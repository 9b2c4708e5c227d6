use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lpterm_core::certify::{infer_bound, interval_bound};
use lpterm_core::eval::{eval, EvalError, Point};
use lpterm_core::models::ops;
use lpterm_core::term::random::{random_term, TermShape};
use lpterm_core::{parse, Interval, Rational, Signature, Term};

fn sig_strategy() -> impl Strategy<Value = Signature> {
    prop_oneof![
        Just(Signature::Truncated),
        Just(Signature::Unital),
        Just(Signature::Extended),
    ]
}

fn term_strategy(max_depth: usize, vars: u32) -> impl Strategy<Value = (Signature, Term)> {
    (sig_strategy(), any::<u64>()).prop_map(move |(sig, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (
            sig,
            random_term(&mut rng, &TermShape::new(sig, max_depth, vars)),
        )
    })
}

fn rational() -> impl Strategy<Value = Rational> {
    (-10_000i64..=10_000, 1i64..=500).prop_map(|(n, d)| Rational::new(n, d))
}

fn wide_rational() -> impl Strategy<Value = Rational> {
    (any::<i64>(), 1i64..=i64::MAX).prop_map(|(n, d)| Rational::new(n, d))
}

fn point(vals: &[Rational]) -> Point {
    vals.iter()
        .cloned()
        .enumerate()
        .map(|(i, v)| (i as u32, v))
        .collect()
}

fn reference(r: &Rational) -> BigRational {
    BigRational::new(r.numer().clone(), r.denom().clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn printed_terms_parse_back((sig, t) in term_strategy(8, 4)) {
        let text = t.to_string();
        let back = parse(&text, sig).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, t, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn arithmetic_matches_num_rational(a in wide_rational(), b in wide_rational()) {
        let (ra, rb) = (reference(&a), reference(&b));
        prop_assert_eq!(reference(&(&a + &b)), &ra + &rb);
        prop_assert_eq!(reference(&(&a - &b)), &ra - &rb);
        prop_assert_eq!(reference(&(&a * &b)), &ra * &rb);
        if !b.is_zero() {
            prop_assert_eq!(reference(&(&a / &b)), &ra / &rb);
        }
        prop_assert_eq!(a.cmp(&b), ra.cmp(&rb));
    }

    #[test]
    fn dyadic_products_stay_canonical(n in any::<i64>(), e in 0u32..200, m in any::<i64>(), f in 0u32..200) {
        let two = BigInt::from(2);
        let a = Rational::new(n, two.pow(e));
        let b = Rational::new(BigInt::from(m) << 70u32, two.pow(f));
        let p = &a * &b;
        prop_assert_eq!(reference(&p), reference(&a) * reference(&b));
    }

    #[test]
    fn interval_bound_encloses_values(
        (_, t) in term_strategy(6, 3),
        lo in prop::collection::vec(rational(), 3),
        width in prop::collection::vec(0i64..50, 3),
        at in prop::collection::vec(0i64..=8, 3),
    ) {
        let bounds: BTreeMap<u32, Interval> = (0..3)
            .map(|i| {
                let hi = &lo[i] + &Rational::from(width[i]);
                (i as u32, Interval::new(lo[i].clone(), hi).unwrap())
            })
            .collect();
        let enclosure = interval_bound(&t, &bounds);
        prop_assume!(enclosure.is_ok());
        let enclosure = enclosure.unwrap();
        // a grid point of the box: lo + width * at/8
        let x: Point = (0..3)
            .map(|i| {
                let step = Rational::new(width[i] * at[i], 8);
                (i as u32, &lo[i] + &step)
            })
            .collect();
        match eval(&t, &x) {
            Ok(v) => prop_assert!(enclosure.contains(&v), "{} at {:?}: {} not in {}", t, x, v, enclosure),
            Err(EvalError::IrrationalValue { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(format!("{t}: {e}"))),
        }
    }

    #[test]
    fn certificates_bound_values(
        (sig, t) in term_strategy(6, 4),
        vals in prop::collection::vec(rational(), 4),
    ) {
        prop_assume!(sig != Signature::Extended);
        let cert = infer_bound(&t).unwrap();
        let x = point(&vals);
        let v = eval(&t, &x).unwrap();
        prop_assert!(v.abs() <= cert.bound_at(&x), "{}: |{}| > {}", t, v, cert);
        if sig == Signature::Truncated {
            prop_assert!(cert.k.is_zero());
        }
    }

    #[test]
    fn lattice_group_laws(
        a in prop::collection::vec(rational(), 3),
        b in prop::collection::vec(rational(), 3),
        c in prop::collection::vec(rational(), 3),
        s in rational(),
    ) {
        use ops::*;
        prop_assert_eq!(join(&a, &b), join(&b, &a));
        prop_assert_eq!(join(&join(&a, &b), &c), join(&a, &join(&b, &c)));
        prop_assert_eq!(meet(&a, &join(&a, &b)), a.clone());
        prop_assert_eq!(add(&a, &join(&b, &c)), join(&add(&a, &b), &add(&a, &c)));
        prop_assert_eq!(add(&join(&a, &b), &meet(&a, &b)), add(&a, &b));
        prop_assert_eq!(sub(&pos(&a), &negpart(&a)), a.clone());
        prop_assert_eq!(add(&pos(&a), &negpart(&a)), abs(&a));
        prop_assert_eq!(meet(&pos(&a), &negpart(&a)), vec![Rational::zero(); 3]);
        // distributivity of the lattice
        prop_assert_eq!(meet(&a, &join(&b, &c)), join(&meet(&a, &b), &meet(&a, &c)));
        // nonnegative scalars are lattice homomorphisms
        let s = s.abs();
        prop_assert_eq!(scale(&s, &join(&a, &b)), join(&scale(&s, &a), &scale(&s, &b)));
        // truncation: idempotent, below 1 and below the argument
        prop_assert_eq!(trunc(&trunc(&a)), trunc(&a));
        prop_assert!(le(&trunc(&a), &a));
    }
}
