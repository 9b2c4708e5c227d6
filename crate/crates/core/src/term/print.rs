//! Canonical DSL rendering. `parse(print(t)) == t` for every term.
//!
//! Binary minus and derived operators are never printed: the output uses
//! primitives only. A nested pair of `tsup` nodes is how a supremum over two
//! indices is written.

use std::fmt;

use super::ast::{IndexExpr, Schema, Term};
use crate::arith::Rational;

const TOP: i8 = -1;
const SUM: i8 = 0;
const JOIN: i8 = 1;
const UNARY: i8 = 2;
const ATOM: i8 = 3;

fn level(t: &Term) -> i8 {
    match t {
        Term::Add(..) => SUM,
        Term::Join(..) => JOIN,
        Term::Scale(..) | Term::IndexedScale(..) => UNARY,
        // the affine tail `+ v` would swallow a following summand
        Term::TruncSup { .. } => TOP,
        _ => ATOM,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, need: i8) -> fmt::Result {
    let wrap = level(t) < need;
    if wrap {
        f.write_str("(")?;
    }
    match t {
        Term::Proj(i) => write!(f, "x{i}")?,
        Term::Zero => f.write_str("zero")?,
        Term::One => f.write_str("one")?,
        Term::Add(a, b) => {
            write_term(f, a, SUM)?;
            f.write_str(" + ")?;
            write_term(f, b, JOIN)?;
        }
        Term::Join(a, b) => {
            write_term(f, a, JOIN)?;
            f.write_str(" v ")?;
            write_term(f, b, UNARY)?;
        }
        Term::Scale(c, t) => {
            write!(f, "{c}*")?;
            write_term(f, t, UNARY)?;
        }
        Term::IndexedScale(e, t) => {
            write!(f, "{{{e}}}*")?;
            write_term(f, t, UNARY)?;
        }
        Term::Trunc(t) => {
            f.write_str("trunc(")?;
            write_term(f, t, SUM)?;
            f.write_str(")")?;
        }
        Term::Square(t) => {
            f.write_str("sq(")?;
            write_term(f, t, SUM)?;
            f.write_str(")")?;
        }
        Term::AbsPow(q, t) => {
            write!(f, "abspow({q}, ")?;
            write_term(f, t, SUM)?;
            f.write_str(")")?;
        }
        Term::TruncSup { cap, schema } => {
            f.write_str("tsup[n] cap=")?;
            write_term(f, cap, SUM)?;
            f.write_str(" : ")?;
            match schema.as_ref() {
                Schema::Affine { u, v } => {
                    f.write_str("n*(")?;
                    write_term(f, u, SUM)?;
                    f.write_str(")")?;
                    if *v != Term::Zero {
                        f.write_str(" + ")?;
                        write_term(f, v, UNARY)?;
                    }
                }
                Schema::Monotone {
                    direction,
                    hint,
                    body,
                } => {
                    write!(f, "mono({}, {hint}, ", direction.keyword())?;
                    write_term(f, body, SUM)?;
                    f.write_str(")")?;
                }
            }
        }
    }
    if wrap {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, TOP)
    }
}

fn ilevel(e: &IndexExpr) -> u8 {
    match e {
        IndexExpr::Add(..) | IndexExpr::Sub(..) => 0,
        IndexExpr::Mul(..) | IndexExpr::Div(..) => 1,
        IndexExpr::Neg(_) => 2,
        _ => 3,
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() && !c.is_negative() {
        write!(f, "{c}")
    } else {
        write!(f, "({c})")
    }
}

fn write_iexpr(f: &mut fmt::Formatter<'_>, e: &IndexExpr, need: u8) -> fmt::Result {
    let wrap = ilevel(e) < need;
    if wrap {
        f.write_str("(")?;
    }
    match e {
        IndexExpr::Const(c) => write_const(f, c)?,
        IndexExpr::N => f.write_str("n")?,
        IndexExpr::Step(k) => write!(f, "step({k})")?,
        IndexExpr::Pow2(a) => {
            f.write_str("pow2(")?;
            write_iexpr(f, a, 0)?;
            f.write_str(")")?;
        }
        IndexExpr::Neg(a) => {
            // `-(2)` stays a negation; `-2` would read back as a constant
            f.write_str("-(")?;
            write_iexpr(f, a, 0)?;
            f.write_str(")")?;
        }
        IndexExpr::Add(a, b) | IndexExpr::Sub(a, b) => {
            write_iexpr(f, a, 0)?;
            f.write_str(if matches!(e, IndexExpr::Add(..)) {
                " + "
            } else {
                " - "
            })?;
            write_iexpr(f, b, 1)?;
        }
        IndexExpr::Mul(a, b) | IndexExpr::Div(a, b) => {
            write_iexpr(f, a, 1)?;
            f.write_str(if matches!(e, IndexExpr::Mul(..)) {
                " * "
            } else {
                " / "
            })?;
            write_iexpr(f, b, 2)?;
        }
    }
    if wrap {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for IndexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_iexpr(f, self, 0)
    }
}
