//! Seeded random terms for sweeps, property tests and benchmarks.

use rand::Rng;

use super::ast::{Direction, IndexExpr, Signature, Term, VarIndex};
use crate::arith::Rational;

/// Shape limits for [`random_term`].
#[derive(Clone, Copy, Debug)]
pub struct TermShape {
    pub sig: Signature,
    pub max_depth: usize,
    pub vars: VarIndex,
    /// Emit monotone schemas (with `step(k)` scalars) besides affine ones.
    pub monotone: bool,
}

impl TermShape {
    pub fn new(sig: Signature, max_depth: usize, vars: VarIndex) -> Self {
        TermShape {
            sig,
            max_depth,
            vars,
            monotone: true,
        }
    }
}

/// Small nonzero-denominator scalar in `[-5, 5]` with denominator at most 4.
pub fn random_scalar<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    Rational::new(rng.random_range(-5i64..=5), rng.random_range(1i64..=4))
}

/// A term with `depth() <= shape.max_depth` over the primitive nodes of
/// `shape.sig`. Black-box nodes are drawn only for the extended signature.
/// Monotone bodies are built so the declared direction holds at every point:
/// `a + {step(k)}*(b v 0)` increases in the index.
pub fn random_term<R: Rng + ?Sized>(rng: &mut R, shape: &TermShape) -> Term {
    gen(rng, shape, shape.max_depth.max(1))
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, shape: &TermShape) -> Term {
    let unital = shape.sig != Signature::Truncated;
    match rng.random_range(0..8) {
        0 => Term::Zero,
        1 if unital => Term::One,
        _ => Term::Proj(rng.random_range(0..shape.vars.max(1))),
    }
}

// `budget` bounds the depth of the result; leaves have depth 1.
fn gen<R: Rng + ?Sized>(rng: &mut R, shape: &TermShape, budget: usize) -> Term {
    if budget <= 1 || rng.random_range(0..6) == 0 {
        return leaf(rng, shape);
    }
    let d = budget - 1;
    let kinds = if shape.sig == Signature::Extended {
        9
    } else {
        7
    };
    match rng.random_range(0..kinds) {
        0 => Term::add(gen(rng, shape, d), gen(rng, shape, d)),
        1 => Term::scale(random_scalar(rng), gen(rng, shape, d)),
        2 => Term::join(gen(rng, shape, d), gen(rng, shape, d)),
        3 if shape.sig == Signature::Truncated => Term::trunc(gen(rng, shape, d)),
        // meet(a, one) = -((-a) v (-one)) costs three levels
        3 if budget >= 4 => Term::meet(gen(rng, shape, budget - 3), Term::One),
        4 | 5 => Term::tsup_affine(gen(rng, shape, d), gen(rng, shape, d), gen(rng, shape, d)),
        6 if shape.monotone && budget >= 6 => {
            let k = rng.random_range(0..4u64);
            let increasing = rng.random_bool(0.5);
            // cap, body = a +- {step(k)}*(b v 0)
            let b_budget = if increasing { budget - 4 } else { budget - 5 };
            let bump =
                Term::indexed_scale(IndexExpr::Step(k), Term::pos(gen(rng, shape, b_budget)));
            let a = gen(rng, shape, budget - 2);
            let (direction, body) = if increasing {
                (Direction::Increasing, Term::add(a, bump))
            } else {
                (Direction::Decreasing, Term::sub(a, bump))
            };
            Term::tsup_monotone(gen(rng, shape, d), direction, 8, body)
        }
        7 => Term::square(gen(rng, shape, d)),
        8 => Term::abs_pow(
            Rational::new(rng.random_range(1i64..=6), rng.random_range(1i64..=3)),
            gen(rng, shape, d),
        ),
        _ => Term::neg(gen(rng, shape, d)),
    }
}
