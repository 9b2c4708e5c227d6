//! Seeded workloads shared by the benchmarks under `benches/`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lpterm_core::models::random_coordinate;
use lpterm_core::term::random::{random_term, TermShape};
use lpterm_core::{Point, Signature, Term};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` terms of depth at most `depth` over `vars` variables.
pub fn terms(sig: Signature, depth: usize, vars: u32, count: usize, seed: u64) -> Vec<Term> {
    let mut r = rng(seed);
    let shape = TermShape::new(sig, depth, vars);
    (0..count).map(|_| random_term(&mut r, &shape)).collect()
}

pub fn points(vars: u32, count: usize, seed: u64) -> Vec<Point> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| (0..vars).map(|i| (i, random_coordinate(&mut r))).collect())
        .collect()
}
