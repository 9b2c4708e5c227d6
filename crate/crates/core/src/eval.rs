//! Exact pointwise semantics of terms.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{sup_affine_capped, Interval, Rational};
use crate::term::{Direction, IndexExpr, IndexSet, Schema, Term, VarIndex};

/// Assignment of rational values to variable indices.
pub type Point = BTreeMap<VarIndex, Rational>;

/// Largest `|e|` accepted in `pow2(e)`.
const MAX_POW2_EXPONENT: i64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value for variable x{0}")]
    MissingVariable(VarIndex),
    #[error("schema declared {declared} but step {step} moves the other way ({from} to {to})")]
    SchemaNotMonotone {
        declared: &'static str,
        step: u64,
        from: Rational,
        to: Rational,
    },
    #[error("index-dependent scalar used outside a mono body")]
    IndexOutOfScope,
    #[error("pow2 exponent {0} is not an integer of magnitude at most 65536")]
    BadExponent(Rational),
    #[error("division by zero in index expression")]
    DivisionByZero,
    #[error("|{base}|^{exp} is irrational")]
    IrrationalValue { base: Rational, exp: Rational },
    #[error("grid needs at least one step per axis")]
    EmptyGrid,
}

/// A monotone schema that did not settle within its probe window. The value
/// reported is the one at the last probed index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityWarning {
    pub hint: u32,
    pub value: Rational,
}

impl fmt::Display for StabilityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "monotone schema not settled after {} steps; reporting {}",
            self.hint, self.value
        )
    }
}

/// Value of an index expression at index `n`.
pub fn eval_index_expr(e: &IndexExpr, n: &Rational) -> Result<Rational, EvalError> {
    let go = |a: &IndexExpr| eval_index_expr(a, n);
    Ok(match e {
        IndexExpr::Const(c) => c.clone(),
        IndexExpr::N => n.clone(),
        IndexExpr::Step(k) => {
            if *n >= Rational::from(*k) {
                Rational::one()
            } else {
                Rational::zero()
            }
        }
        IndexExpr::Pow2(a) => {
            let k = go(a)?;
            match k.to_i64() {
                Some(v) if k.is_integer() && v.abs() <= MAX_POW2_EXPONENT => Rational::pow2(v),
                _ => return Err(EvalError::BadExponent(k)),
            }
        }
        IndexExpr::Neg(a) => -go(a)?,
        IndexExpr::Add(a, b) => go(a)? + go(b)?,
        IndexExpr::Sub(a, b) => go(a)? - go(b)?,
        IndexExpr::Mul(a, b) => go(a)? * go(b)?,
        IndexExpr::Div(a, b) => {
            let d = go(b)?;
            if d.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            go(a)? / d
        }
    })
}

struct Ctx<'a> {
    x: &'a Point,
    warnings: Vec<StabilityWarning>,
}

/// Evaluate `t` at `x`. Stability warnings from monotone schemas are
/// dropped; use [`eval_traced`] to observe them.
pub fn eval(t: &Term, x: &Point) -> Result<Rational, EvalError> {
    eval_traced(t, x).map(|(v, _)| v)
}

/// Evaluate `t` at `x`, also returning any stability warnings.
pub fn eval_traced(t: &Term, x: &Point) -> Result<(Rational, Vec<StabilityWarning>), EvalError> {
    let mut ctx = Ctx {
        x,
        warnings: Vec::new(),
    };
    let v = go(t, None, &mut ctx)?;
    Ok((v, ctx.warnings))
}

fn go(t: &Term, n: Option<&Rational>, ctx: &mut Ctx<'_>) -> Result<Rational, EvalError> {
    Ok(match t {
        Term::Proj(i) => ctx
            .x
            .get(i)
            .cloned()
            .ok_or(EvalError::MissingVariable(*i))?,
        Term::Zero => Rational::zero(),
        Term::One => Rational::one(),
        Term::Add(a, b) => go(a, n, ctx)? + go(b, n, ctx)?,
        Term::Scale(c, a) => c * &go(a, n, ctx)?,
        Term::IndexedScale(e, a) => {
            let idx = n.ok_or(EvalError::IndexOutOfScope)?;
            eval_index_expr(e, idx)? * go(a, n, ctx)?
        }
        Term::Join(a, b) => go(a, n, ctx)?.max(go(b, n, ctx)?),
        // min(f, 1) for every sign of f
        Term::Trunc(a) => go(a, n, ctx)?.min(Rational::one()),
        Term::Square(a) => {
            let v = go(a, n, ctx)?;
            &v * &v
        }
        Term::AbsPow(q, a) => {
            let v = go(a, n, ctx)?.abs();
            v.pow_exact(q).ok_or_else(|| EvalError::IrrationalValue {
                base: v,
                exp: q.clone(),
            })?
        }
        Term::TruncSup { cap, schema } => {
            let c = go(cap, n, ctx)?;
            schema_sup(schema, &c, n, ctx)?
        }
    })
}

fn schema_sup(
    schema: &Schema,
    cap: &Rational,
    n: Option<&Rational>,
    ctx: &mut Ctx<'_>,
) -> Result<Rational, EvalError> {
    match schema {
        Schema::Affine { u, v } => {
            let a = go(u, n, ctx)?;
            let b = go(v, n, ctx)?;
            Ok(sup_affine_capped(&a, &b, cap))
        }
        Schema::Monotone {
            direction,
            hint,
            body,
        } => {
            // past this index the body no longer depends on n
            let settled = body
                .outer_index_exprs()
                .iter()
                .map(|e| e.constant_from())
                .try_fold(0u64, |acc, k| k.map(|k| acc.max(k)));
            let inc = *direction == Direction::Increasing;
            let mut prev: Option<Rational> = None;
            for step in 0..=u64::from(*hint) {
                let f = go(body, Some(&Rational::from(step)), ctx)?;
                let s = if inc {
                    f.min(cap.clone())
                } else {
                    f.max(cap.clone())
                };
                if let Some(p) = &prev {
                    let wrong_way = if inc { s < *p } else { s > *p };
                    if wrong_way {
                        return Err(EvalError::SchemaNotMonotone {
                            declared: direction.keyword(),
                            step,
                            from: p.clone(),
                            to: s,
                        });
                    }
                }
                if s == *cap || settled.is_some_and(|k| step >= k) {
                    return Ok(s);
                }
                prev = Some(s);
            }
            let value = prev.expect("the probe window is never empty");
            ctx.warnings.push(StabilityWarning {
                hint: *hint,
                value: value.clone(),
            });
            Ok(value)
        }
    }
}

/// Truncated supremum of `schema` under `cap_value` at `x`; for a decreasing
/// monotone schema, the dual truncated infimum.
pub fn eval_schema_sup(
    schema: &Schema,
    cap_value: &Rational,
    x: &Point,
) -> Result<(Rational, Vec<StabilityWarning>), EvalError> {
    let mut ctx = Ctx {
        x,
        warnings: Vec::new(),
    };
    let v = schema_sup(schema, cap_value, None, &mut ctx)?;
    Ok((v, ctx.warnings))
}

/// The uniform grid over `bounds` with `steps` points per axis, endpoints
/// included. Points are in lexicographic order of coordinates, the lowest
/// variable index varying slowest.
pub fn grid_points(
    bounds: &BTreeMap<VarIndex, Interval>,
    steps: usize,
) -> Result<Vec<Point>, EvalError> {
    if steps == 0 {
        return Err(EvalError::EmptyGrid);
    }
    let axes: Vec<(VarIndex, Vec<Rational>)> = bounds
        .iter()
        .map(|(i, iv)| {
            let vals = if steps == 1 {
                vec![iv.lo().clone()]
            } else {
                let width = iv.hi() - iv.lo();
                (0..steps)
                    .map(|k| iv.lo() + &(&width * &Rational::new(k as i64, (steps - 1) as i64)))
                    .collect()
            };
            (*i, vals)
        })
        .collect();
    let mut points = vec![Point::new()];
    for (i, vals) in &axes {
        let mut next = Vec::with_capacity(points.len() * vals.len());
        for p in &points {
            for v in vals {
                let mut q = p.clone();
                q.insert(*i, v.clone());
                next.push(q);
            }
        }
        points = next;
    }
    Ok(points)
}

/// Evaluate `t` on the uniform grid over `bounds`. The box must cover the
/// free variables of `t`.
pub fn eval_on_grid(
    t: &Term,
    bounds: &BTreeMap<VarIndex, Interval>,
    steps: usize,
) -> Result<Vec<(Point, Rational)>, EvalError> {
    if let Some(i) = t.free_vars().iter().find(|i| !bounds.contains_key(i)) {
        return Err(EvalError::MissingVariable(i));
    }
    grid_points(bounds, steps)?
        .into_par_iter()
        .map(|p| eval(t, &p).map(|v| (p, v)))
        .collect()
}

/// Anything that maps points to rationals and declares which variables it
/// reads.
pub trait Operation: Sync {
    fn variables(&self) -> IndexSet;
    fn apply(&self, x: &Point) -> Result<Rational, EvalError>;
}

impl Operation for Term {
    fn variables(&self) -> IndexSet {
        self.free_vars()
    }

    fn apply(&self, x: &Point) -> Result<Rational, EvalError> {
        eval(self, x)
    }
}

type PointFn = dyn Fn(&Point) -> Result<Rational, EvalError> + Send + Sync;

/// An [`Operation`] given by a closure.
pub struct FnOperation {
    vars: IndexSet,
    f: Box<PointFn>,
}

impl FnOperation {
    pub fn new(
        vars: impl IntoIterator<Item = VarIndex>,
        f: impl Fn(&Point) -> Result<Rational, EvalError> + Send + Sync + 'static,
    ) -> Self {
        FnOperation {
            vars: vars.into_iter().collect(),
            f: Box::new(f),
        }
    }
}

impl Operation for FnOperation {
    fn variables(&self) -> IndexSet {
        self.vars.clone()
    }

    fn apply(&self, x: &Point) -> Result<Rational, EvalError> {
        (self.f)(x)
    }
}

/// Build a point from `(index, value)` pairs.
pub fn point<I, R>(pairs: I) -> Point
where
    I: IntoIterator<Item = (VarIndex, R)>,
    R: Into<Rational>,
{
    pairs.into_iter().map(|(i, v)| (i, v.into())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{parse, Signature};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn at0(t: &Term, x: Rational) -> Rational {
        eval(t, &point([(0, x)])).unwrap()
    }

    #[test]
    fn truncation_is_min_with_one() {
        let t = parse("trunc(x0)", Signature::Truncated).unwrap();
        assert_eq!(at0(&t, 2.into()), Rational::one());
        assert_eq!(at0(&t, r(-5, 2)), r(-5, 2));
    }

    #[test]
    fn indicator_of_x_above_one() {
        let t = parse(
            "tsup[n] cap=trunc(x0) : n*(x0 - trunc(x0))",
            Signature::Truncated,
        )
        .unwrap();
        assert_eq!(at0(&t, 3.into()), Rational::one());
        assert_eq!(at0(&t, 1.into()), Rational::zero());
        assert_eq!(at0(&t, r(1, 2)), Rational::zero());
    }

    #[test]
    fn decreasing_schema_of_indicators() {
        // inf_n max(ind_{x > q_n}, 0) with q_n = 2(1 - 2^-(n+1))
        let ind = "tsup[n] cap=trunc({pow2(n + 1) / (2 * (pow2(n + 1) - 1))}*x0) : \
                   n*({pow2(n + 1) / (2 * (pow2(n + 1) - 1))}*x0 \
                   - trunc({pow2(n + 1) / (2 * (pow2(n + 1) - 1))}*x0))";
        let text = format!("tsup[n] cap=zero : mono(dec, 64, {ind})");
        let t = parse(&text, Signature::Truncated).unwrap();
        let (v, w) = eval_traced(&t, &point([(0, 2)])).unwrap();
        assert_eq!(v, Rational::one());
        assert_eq!(w.len(), 1);
        let (v, w) = eval_traced(&t, &point([(0, r(3, 2))])).unwrap();
        assert_eq!(v, Rational::zero());
        assert!(w.is_empty());
    }

    #[test]
    fn monotonicity_is_enforced() {
        let t = parse(
            "tsup[n] cap=x0 : mono(inc, 8, {-(n)}*one)",
            Signature::Unital,
        )
        .unwrap();
        assert!(matches!(
            eval(&t, &point([(0, 5)])),
            Err(EvalError::SchemaNotMonotone { step: 1, .. })
        ));
    }

    #[test]
    fn step_bodies_settle_exactly() {
        let t = parse(
            "tsup[n] cap=x0 : mono(inc, 4, {step(2)}*one + {step(9)}*one)",
            Signature::Unital,
        )
        .unwrap();
        // settles at index 9, beyond the hint
        let (v, w) = eval_traced(&t, &point([(0, 10)])).unwrap();
        assert_eq!(v, Rational::one());
        assert_eq!(w.len(), 1);
        let t = parse(
            "tsup[n] cap=x0 : mono(inc, 16, {step(2)}*one)",
            Signature::Unital,
        )
        .unwrap();
        assert_eq!(
            eval_traced(&t, &point([(0, 10)])).unwrap(),
            (Rational::one(), vec![])
        );
    }

    #[test]
    fn affine_schema_value() {
        let s = Schema::Affine {
            u: Term::One,
            v: Term::Zero,
        };
        let (v, _) = eval_schema_sup(&s, &5.into(), &Point::new()).unwrap();
        assert_eq!(v, Rational::from(5));
    }

    #[test]
    fn grid_examples() {
        let bx: BTreeMap<_, _> = [(0, Interval::new(0.into(), 1.into()).unwrap())].into();
        let vals: Vec<_> = eval_on_grid(&Term::proj(0), &bx, 3)
            .unwrap()
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        assert_eq!(vals, vec![Rational::zero(), r(1, 2), Rational::one()]);
        let one = eval_on_grid(&Term::One, &BTreeMap::new(), 7).unwrap();
        assert_eq!(one.len(), 1);
        assert!(eval_on_grid(&Term::proj(1), &bx, 3).is_err());
    }

    #[test]
    fn missing_variable() {
        assert_eq!(
            eval(&Term::proj(4), &Point::new()),
            Err(EvalError::MissingVariable(4))
        );
    }
}
