use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use lpterm_bench::{points, terms};
use lpterm_core::models::{check_identity, IdentityId, Model};
use lpterm_core::witness::{build_witness, Mode, WitnessConfig};
use lpterm_core::{eval, free_eq, infer_bound, parse, Rational, Signature};

fn evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("eval");
    for depth in [4, 6, 8] {
        let ts = terms(Signature::Unital, depth, 3, 64, 1);
        let xs = points(3, 64, 2);
        group.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, _| {
            b.iter(|| {
                for (t, x) in ts.iter().zip(&xs) {
                    let _ = black_box(eval(t, x));
                }
            })
        });
    }
    group.finish();
}

fn certification(c: &mut Criterion) {
    let ts = terms(Signature::Truncated, 8, 4, 256, 3);
    c.bench_function("certify/depth8", |b| {
        b.iter(|| {
            for t in &ts {
                black_box(infer_bound(t).unwrap());
            }
        })
    });
}

fn arithmetic(c: &mut Criterion) {
    let xs: Vec<Rational> = points(1, 512, 4)
        .into_iter()
        .map(|p| p[&0].clone())
        .collect();
    c.bench_function("rational/mul_add", |b| {
        b.iter(|| {
            let mut acc = Rational::zero();
            for w in xs.windows(2) {
                acc += &(&w[0] * &w[1]);
            }
            black_box(acc)
        })
    });
}

fn witnesses(c: &mut Criterion) {
    let sq = parse("sq(x0 + x1)", Signature::Extended).unwrap();
    let mut group = c.benchmark_group("witness");
    group.sample_size(10);
    for atoms in [8, 32] {
        let cfg = WitnessConfig::new(Rational::from(2), Mode::Finite, atoms).unwrap();
        group.bench_with_input(BenchmarkId::new("sq_p2_finite", atoms), &cfg, |b, cfg| {
            b.iter(|| black_box(build_witness(&sq, cfg).unwrap()))
        });
    }
    group.finish();
}

fn identities(c: &mut Criterion) {
    let mut group = c.benchmark_group("axioms");
    group.sample_size(10);
    for model in ["r", "power:5", "quotient:5:2"] {
        let m: Model = model.parse().unwrap();
        group.bench_function(model, |b| {
            b.iter(|| black_box(check_identity(m, IdentityId::Ts3, 200, 0, false)))
        });
    }
    group.finish();
}

fn equality(c: &mut Criterion) {
    let l = parse("x0 v x1 + meet(x0, x1)", Signature::Truncated).unwrap();
    let r = parse("x0 + x1", Signature::Truncated).unwrap();
    c.bench_function("free_eq/lattice_sum", |b| {
        b.iter(|| black_box(free_eq(&l, &r, Signature::Truncated, 1000, 0).unwrap()))
    });
}

criterion_group!(
    benches,
    evaluation,
    certification,
    arithmetic,
    witnesses,
    identities,
    equality
);
criterion_main!(benches);
