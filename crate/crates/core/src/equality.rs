//! Equality in the free algebra over the projections, decided by sampling:
//! two terms are equal there exactly when they agree as functions.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::eval::{eval, EvalError, Point};
use crate::models::random_coordinate;
use crate::term::{Signature, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FreeEqError {
    #[error("{side} term uses `{node}`, which is outside signature {sig}")]
    SignatureMismatch {
        side: &'static str,
        node: &'static str,
        sig: Signature,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreeEq {
    /// `skipped` counts points where a value was irrational.
    Agree {
        samples: usize,
        skipped: usize,
    },
    Differ {
        sample: usize,
        point: Point,
    },
}

impl fmt::Display for FreeEq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreeEq::Agree { samples, .. } => write!(f, "agree samples={samples}"),
            FreeEq::Differ { point, .. } => {
                write!(f, "differ at=")?;
                for (k, (i, v)) in point.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "x{i}={v}")?;
                }
                Ok(())
            }
        }
    }
}

/// Compares `t1` and `t2` on `samples` seeded points over the union of
/// their free variables. Sample `i` uses ChaCha stream `i`, so the reported
/// point is the lowest distinguishing sample.
pub fn free_eq(
    t1: &Term,
    t2: &Term,
    sig: Signature,
    samples: usize,
    seed: u64,
) -> Result<FreeEq, FreeEqError> {
    for (side, t) in [("left", t1), ("right", t2)] {
        if let Some(node) = t.signature_violation(sig) {
            return Err(FreeEqError::SignatureMismatch { side, node, sig });
        }
    }
    let vars = t1.free_vars().union(&t2.free_vars());

    enum Probe {
        Same,
        Skip,
        Differ(Point),
    }
    let probe = |i: usize| -> Result<Probe, FreeEqError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let x: Point = vars
            .iter()
            .map(|v| (v, random_coordinate(&mut rng)))
            .collect();
        match (eval(t1, &x), eval(t2, &x)) {
            (Ok(a), Ok(b)) if a == b => Ok(Probe::Same),
            (Ok(_), Ok(_)) => Ok(Probe::Differ(x)),
            (Err(EvalError::IrrationalValue { .. }), _)
            | (_, Err(EvalError::IrrationalValue { .. })) => Ok(Probe::Skip),
            (Err(e), _) | (_, Err(e)) => Err(e.into()),
        }
    };
    let results: Vec<Result<Probe, FreeEqError>> =
        (0..samples).into_par_iter().map(probe).collect();
    let mut skipped = 0;
    for (sample, r) in results.into_iter().enumerate() {
        match r? {
            Probe::Same => {}
            Probe::Skip => skipped += 1,
            Probe::Differ(point) => return Ok(FreeEq::Differ { sample, point }),
        }
    }
    Ok(FreeEq::Agree { samples, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse;

    fn eq(a: &str, b: &str, sig: Signature) -> FreeEq {
        free_eq(
            &parse(a, sig).unwrap(),
            &parse(b, sig).unwrap(),
            sig,
            2000,
            1,
        )
        .unwrap()
    }

    #[test]
    fn lattice_sum_identity_agrees() {
        let r = eq("(x0 v x1) + meet(x0, x1)", "x0 + x1", Signature::Truncated);
        assert!(matches!(r, FreeEq::Agree { skipped: 0, .. }));
    }

    #[test]
    fn trunc_is_not_identity() {
        match eq("x0", "trunc(x0)", Signature::Truncated) {
            FreeEq::Differ { point, .. } => assert!(point[&0] > crate::Rational::one()),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn signature_is_enforced() {
        let a = parse("meet(x0, one)", Signature::Unital).unwrap();
        let b = parse("x0", Signature::Truncated).unwrap();
        assert!(matches!(
            free_eq(&a, &b, Signature::Truncated, 10, 0),
            Err(FreeEqError::SignatureMismatch { side: "left", .. })
        ));
    }
}
