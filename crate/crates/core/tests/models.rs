use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lpterm_core::models::{check_identity, ops, IdentityId, IdentityOutcome, Model, ModelSchema};
use lpterm_core::Rational;

fn v(xs: &[i64]) -> Vec<Rational> {
    xs.iter().map(|&x| Rational::from(x)).collect()
}

#[test]
fn quotient_map_is_a_homomorphism() {
    let base = Model::power(5).unwrap();
    let quot = Model::quotient(5, 2).unwrap();
    let qm = |e: &[Rational]| quot.quotient_map(e).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let f = base.random_element(&mut rng);
        let g = base.random_element(&mut rng);
        let h = base.random_element(&mut rng);
        let c = lpterm_core::models::random_coordinate(&mut rng);
        assert_eq!(qm(&ops::add(&f, &g)), ops::add(&qm(&f), &qm(&g)));
        assert_eq!(qm(&ops::scale(&c, &f)), ops::scale(&c, &qm(&f)));
        assert_eq!(qm(&ops::join(&f, &g)), ops::join(&qm(&f), &qm(&g)));
        assert_eq!(qm(&ops::trunc(&f)), ops::trunc(&qm(&f)));
        assert_eq!(qm(&base.zero()), quot.zero());
        assert_eq!(qm(&base.unit()), quot.unit());
        let lhs = base
            .truncsup(
                &h,
                &ModelSchema::Affine {
                    u: f.clone(),
                    v: g.clone(),
                },
            )
            .unwrap();
        let rhs = quot
            .truncsup(
                &qm(&h),
                &ModelSchema::Affine {
                    u: qm(&f),
                    v: qm(&g),
                },
            )
            .unwrap();
        assert_eq!(qm(&lhs), rhs);
    }
}

#[test]
fn quotient_truncsup_ignores_the_null_set() {
    let quot = Model::quotient(3, 1).unwrap();
    let a = quot.quotient_map(&v(&[1, 4, 100])).unwrap();
    let b = quot.quotient_map(&v(&[1, 4, -100])).unwrap();
    let cap = quot.quotient_map(&v(&[3, 3, 0])).unwrap();
    let sa = quot
        .truncsup(&cap, &ModelSchema::List(vec![a.clone(), a]))
        .unwrap();
    let sb = quot
        .truncsup(&cap, &ModelSchema::List(vec![b.clone(), b]))
        .unwrap();
    assert_eq!(sa, sb);
    assert_eq!(sa, v(&[1, 3]));
}

#[test]
fn list_schema_takes_capped_maximum() {
    let m = Model::power(2).unwrap();
    let items = vec![v(&[1, 9]), v(&[4, -2]), v(&[2, 0])];
    let got = m.truncsup(&v(&[3, 5]), &ModelSchema::List(items)).unwrap();
    assert_eq!(got, v(&[3, 5]));
}

#[test]
fn dimension_mismatch_is_reported() {
    let m = Model::power(2).unwrap();
    let err = m.truncsup(&v(&[1]), &ModelSchema::List(vec![v(&[1, 2])]));
    assert!(err.is_err());
    assert!(Model::quotient(3, 1)
        .unwrap()
        .section(&v(&[1, 2, 3]))
        .is_err());
}

#[test]
fn catalog_holds_on_every_model_kind() {
    for model in ["r", "power:4", "quotient:4:2"] {
        let model: Model = model.parse().unwrap();
        for id in IdentityId::ALL {
            let rep = check_identity(model, id, 500, 99, false);
            assert_eq!(
                rep.outcome,
                IdentityOutcome::Holds { samples: 500 },
                "{model} {rep}"
            );
        }
    }
}

#[test]
fn dropping_h_from_ts3_is_refuted() {
    let rep = check_identity(Model::Reals, IdentityId::Ts3, 10_000, 0, true);
    let line = rep.to_string();
    assert!(line.starts_with("TS3-mut FAILS"), "{line}");
    assert!(line.contains("h=("), "{line}");
}
