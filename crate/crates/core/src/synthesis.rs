//! Compile indicators, simple functions and dominated ladders into terms
//! over the truncated generators.
//!
//! Constructions are checked on an explicit verification grid. Grid points
//! lying on the boundary of a strict threshold are skipped in comparisons:
//! the indicator jumps there by design.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{Interval, Rational};
use crate::eval::{eval, grid_points, EvalError, Point};
use crate::term::{
    parse, Direction, IndexExpr, ParseError, Signature, Term, VarIndex, DEFAULT_STABILIZATION_HINT,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("threshold {0} must be positive")]
    NonpositiveThreshold(Rational),
    #[error("region combines an empty list of sets")]
    EmptyRegion,
    #[error("ladder has no steps")]
    EmptyLadder,
    #[error("coefficient {0} must be nonnegative")]
    NegativeCoefficient(Rational),
    #[error("dominator is {got} at {}, below the required {needed}", show_point(.point))]
    DominatorTooSmall {
        point: Point,
        needed: Rational,
        got: Rational,
    },
    #[error("ladder step {step} decreases at {}", show_point(.point))]
    LadderNotIncreasing { step: usize, point: Point },
    #[error("synthesized term gives {got} at {}, expected {expected}", show_point(.point))]
    VerificationFailed {
        point: Point,
        expected: Rational,
        got: Rational,
    },
    #[error("region syntax error at column {col}: {message}")]
    RegionSyntax { col: usize, message: String },
    #[error("spec line {line}: {message}")]
    SpecSyntax { line: usize, message: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub fn show_point(p: &Point) -> String {
    let parts: Vec<String> = p.iter().map(|(i, v)| format!("x{i}={v}")).collect();
    parts.join(",")
}

/// `f+`, with `trunc`-free form `f v 0`.
fn pos(f: Term) -> Term {
    Term::pos(f)
}

/// `tsup[n] cap=trunc(f) : n*(f - trunc(f))`: 1 where `f > 1`, else 0, for
/// `f >= 0`.
fn above_one(f: Term) -> Term {
    Term::tsup_affine(
        Term::trunc(f.clone()),
        Term::sub(f.clone(), Term::trunc(f)),
        Term::Zero,
    )
}

fn check_threshold(lambda: &Rational) -> Result<(), SynthError> {
    if lambda.is_positive() {
        Ok(())
    } else {
        Err(SynthError::NonpositiveThreshold(lambda.clone()))
    }
}

/// Indicator of `x_i > lambda`.
///
/// Built from `(x_i)+ / lambda` rather than `x_i / lambda`: for negative
/// inputs the bare quotient would make the supremum equal to the input
/// itself instead of 0.
pub fn indicator_gt(i: VarIndex, lambda: &Rational) -> Result<Term, SynthError> {
    check_threshold(lambda)?;
    let c = lambda.recip();
    let f = if c == 1 {
        pos(Term::proj(i))
    } else {
        Term::scale(c, pos(Term::proj(i)))
    };
    Ok(above_one(f))
}

/// `1 / q_n` for `q_n = lambda (1 - 2^-(n+1))`, as an expression in `n`.
fn inverse_q(lambda: &Rational) -> IndexExpr {
    let p = || {
        IndexExpr::Pow2(Box::new(IndexExpr::Add(
            Box::new(IndexExpr::N),
            Box::new(IndexExpr::Const(Rational::one())),
        )))
    };
    IndexExpr::Div(
        Box::new(p()),
        Box::new(IndexExpr::Mul(
            Box::new(IndexExpr::Const(lambda.clone())),
            Box::new(IndexExpr::Sub(
                Box::new(p()),
                Box::new(IndexExpr::Const(Rational::one())),
            )),
        )),
    )
}

/// `ind_{x_i > q_n}` inside a mono body.
fn indicator_gt_at_q(i: VarIndex, lambda: &Rational) -> Term {
    above_one(Term::indexed_scale(inverse_q(lambda), pos(Term::proj(i))))
}

/// The threshold `q_n = lambda (1 - 2^-(n+1))`.
pub fn q_n(lambda: &Rational, n: u32) -> Rational {
    lambda * &(Rational::one() - Rational::pow2(-(i64::from(n) + 1)))
}

/// Indicator of `x_i >= lambda`: the countable meet of `ind_{x_i > q_n}`
/// with cap 0, written as `-tsup^0 (-ind_{x_i > q_n})`.
///
/// For `x < lambda` the value settles exactly once `q_n > x`, i.e. from
/// `n = ceil(log2(lambda / (lambda - x)))`. For `x >= lambda` it is the
/// value at the stabilization hint.
pub fn indicator_ge(i: VarIndex, lambda: &Rational) -> Result<Term, SynthError> {
    check_threshold(lambda)?;
    Ok(Term::neg(Term::tsup_monotone(
        Term::Zero,
        Direction::Increasing,
        DEFAULT_STABILIZATION_HINT,
        Term::neg(indicator_gt_at_q(i, lambda)),
    )))
}

/// The same indicator as a decreasing schema: `inf_n (ind_{x_i > q_n} v 0)`.
pub fn indicator_ge_dual(i: VarIndex, lambda: &Rational) -> Result<Term, SynthError> {
    check_threshold(lambda)?;
    Ok(Term::tsup_monotone(
        Term::Zero,
        Direction::Decreasing,
        DEFAULT_STABILIZATION_HINT,
        indicator_gt_at_q(i, lambda),
    ))
}

/// Indicator of `x_i > lambda` for any rational `lambda`, using the unit:
/// `x_i > lambda` iff `(x_i + (1 - lambda) 1)+ > 1`. Not truncated-signature:
/// it needs `one`.
pub fn indicator_gt_unital(i: VarIndex, lambda: &Rational) -> Term {
    let shift = Rational::one() - lambda.clone();
    let f = pos(Term::add(Term::proj(i), Term::scale(shift, Term::One)));
    let capped = Term::meet(f.clone(), Term::One);
    Term::tsup_affine(capped.clone(), Term::sub(f, capped), Term::Zero)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Relation {
    Gt,
    Ge,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ThresholdSet {
    pub var: VarIndex,
    pub relation: Relation,
    pub lambda: Rational,
}

impl ThresholdSet {
    pub fn new(var: VarIndex, relation: Relation, lambda: Rational) -> Result<Self, SynthError> {
        check_threshold(&lambda)?;
        Ok(ThresholdSet {
            var,
            relation,
            lambda,
        })
    }

    pub fn contains(&self, x: &Point) -> Result<bool, EvalError> {
        let v = x
            .get(&self.var)
            .ok_or(EvalError::MissingVariable(self.var))?;
        Ok(match self.relation {
            Relation::Gt => *v > self.lambda,
            Relation::Ge => *v >= self.lambda,
        })
    }

    pub fn indicator(&self) -> Result<Term, SynthError> {
        match self.relation {
            Relation::Gt => indicator_gt(self.var, &self.lambda),
            Relation::Ge => indicator_ge(self.var, &self.lambda),
        }
    }
}

/// Finite meets and joins of coordinate thresholds.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Region {
    Threshold(ThresholdSet),
    And(Vec<Region>),
    Or(Vec<Region>),
}

impl Region {
    pub fn contains(&self, x: &Point) -> Result<bool, EvalError> {
        match self {
            Region::Threshold(t) => t.contains(x),
            Region::And(rs) => {
                for r in rs {
                    if !r.contains(x)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Region::Or(rs) => {
                for r in rs {
                    if r.contains(x)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    fn thresholds(&self) -> Vec<&ThresholdSet> {
        match self {
            Region::Threshold(t) => vec![t],
            Region::And(rs) | Region::Or(rs) => rs.iter().flat_map(|r| r.thresholds()).collect(),
        }
    }

    pub fn variables(&self) -> Vec<VarIndex> {
        let mut v: Vec<VarIndex> = self.thresholds().iter().map(|t| t.var).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// True when `x` sits exactly on a strict threshold.
    pub fn on_strict_boundary(&self, x: &Point) -> bool {
        self.thresholds()
            .iter()
            .any(|t| t.relation == Relation::Gt && x.get(&t.var) == Some(&t.lambda))
    }

    /// Indicator of the region as a meet/join of threshold indicators.
    pub fn indicator(&self) -> Result<Term, SynthError> {
        match self {
            Region::Threshold(t) => t.indicator(),
            Region::And(rs) | Region::Or(rs) => {
                let mut parts = rs.iter().map(|r| r.indicator());
                let mut acc = parts.next().ok_or(SynthError::EmptyRegion)??;
                for p in parts {
                    acc = match self {
                        Region::And(_) => Term::meet(acc, p?),
                        _ => Term::join(acc, p?),
                    };
                }
                Ok(acc)
            }
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Threshold(t) => {
                let op = match t.relation {
                    Relation::Gt => ">",
                    Relation::Ge => ">=",
                };
                write!(f, "x{}{op}{}", t.var, t.lambda)
            }
            Region::And(rs) => {
                for (k, r) in rs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" & ")?;
                    }
                    if matches!(r, Region::Or(_)) {
                        write!(f, "({r})")?;
                    } else {
                        write!(f, "{r}")?;
                    }
                }
                Ok(())
            }
            Region::Or(rs) => {
                for (k, r) in rs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{r}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parse `x0>1 & x1>=2 | (x2>3/2)`; `&` binds tighter than `|`.
pub fn parse_region(text: &str) -> Result<Region, SynthError> {
    struct P<'a> {
        s: &'a [u8],
        at: usize,
    }
    impl P<'_> {
        fn skip(&mut self) {
            while self.at < self.s.len() && self.s[self.at].is_ascii_whitespace() {
                self.at += 1;
            }
        }
        fn err<T>(&self, message: impl Into<String>) -> Result<T, SynthError> {
            Err(SynthError::RegionSyntax {
                col: self.at + 1,
                message: message.into(),
            })
        }
        fn eat(&mut self, c: u8) -> bool {
            self.skip();
            if self.s.get(self.at) == Some(&c) {
                self.at += 1;
                true
            } else {
                false
            }
        }
        fn or(&mut self) -> Result<Region, SynthError> {
            let mut parts = vec![self.and()?];
            while self.eat(b'|') {
                parts.push(self.and()?);
            }
            Ok(if parts.len() == 1 {
                parts.pop().unwrap()
            } else {
                Region::Or(parts)
            })
        }
        fn and(&mut self) -> Result<Region, SynthError> {
            let mut parts = vec![self.atom()?];
            while self.eat(b'&') {
                parts.push(self.atom()?);
            }
            Ok(if parts.len() == 1 {
                parts.pop().unwrap()
            } else {
                Region::And(parts)
            })
        }
        fn atom(&mut self) -> Result<Region, SynthError> {
            if self.eat(b'(') {
                let r = self.or()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                return Ok(r);
            }
            if !self.eat(b'x') {
                return self.err("expected a threshold like `x0>1`");
            }
            let start = self.at;
            while self.at < self.s.len() && self.s[self.at].is_ascii_digit() {
                self.at += 1;
            }
            let var: VarIndex = match std::str::from_utf8(&self.s[start..self.at])
                .ok()
                .and_then(|d| d.parse().ok())
            {
                Some(v) => v,
                None => return self.err("expected a variable index"),
            };
            if !self.eat(b'>') {
                return self.err("expected `>` or `>=`");
            }
            let relation = if self.s.get(self.at) == Some(&b'=') {
                self.at += 1;
                Relation::Ge
            } else {
                Relation::Gt
            };
            self.skip();
            let start = self.at;
            while self.at < self.s.len() && b"0123456789/.-".contains(&self.s[self.at]) {
                self.at += 1;
            }
            let lit = std::str::from_utf8(&self.s[start..self.at]).unwrap_or_default();
            let lambda: Rational = match lit.parse() {
                Ok(v) => v,
                Err(_) => {
                    self.at = start;
                    return self.err(format!("bad threshold `{lit}`"));
                }
            };
            Ok(Region::Threshold(ThresholdSet::new(var, relation, lambda)?))
        }
    }
    let mut p = P {
        s: text.as_bytes(),
        at: 0,
    };
    let r = p.or()?;
    p.skip();
    if p.at != p.s.len() {
        return p.err("unexpected trailing input");
    }
    Ok(r)
}

/// Box and resolution on which constructions are checked.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VerificationGrid {
    pub bounds: BTreeMap<VarIndex, Interval>,
    pub steps: usize,
}

impl VerificationGrid {
    /// `[lo, hi]` on each listed variable.
    pub fn uniform(
        vars: impl IntoIterator<Item = VarIndex>,
        lo: Rational,
        hi: Rational,
        steps: usize,
    ) -> Self {
        let side = Interval::new(lo, hi).expect("grid side must be ordered");
        VerificationGrid {
            bounds: vars.into_iter().map(|i| (i, side.clone())).collect(),
            steps,
        }
    }

    pub fn points(&self) -> Result<Vec<Point>, EvalError> {
        grid_points(&self.bounds, self.steps)
    }
}

/// Indicator of `region`, written as the truncated sup with cap `ind_Y` of
/// `n (g - ind_Y / 2)+`. It equals `ind_Y` wherever `g > 1/2` on the region;
/// `g >= 1` is required at grid points inside the region.
pub fn region_indicator(
    region: &Region,
    g: &Term,
    grid: &VerificationGrid,
) -> Result<Term, SynthError> {
    let ind = region.indicator()?;
    let half = Rational::new(1, 2);
    let term = Term::tsup_affine(
        ind.clone(),
        pos(Term::add(g.clone(), Term::scale(-half, ind))),
        Term::Zero,
    );
    let points = grid.points()?;
    let checks: Vec<Result<(), SynthError>> = points
        .par_iter()
        .map(|x| {
            if region.on_strict_boundary(x) {
                return Ok(());
            }
            let inside = region.contains(x)?;
            if inside {
                let gv = eval(g, x)?;
                if gv < 1 {
                    return Err(SynthError::DominatorTooSmall {
                        point: x.clone(),
                        needed: Rational::one(),
                        got: gv,
                    });
                }
            }
            let expected = if inside {
                Rational::one()
            } else {
                Rational::zero()
            };
            let got = eval(&term, x)?;
            if got != expected {
                return Err(SynthError::VerificationFailed {
                    point: x.clone(),
                    expected,
                    got,
                });
            }
            Ok(())
        })
        .collect();
    checks.into_iter().collect::<Result<(), _>>()?;
    Ok(term)
}

/// `sum_k c_k ind_{R_k}`, required to stay below `dominator`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SimpleFunctionSpec {
    pub entries: Vec<(Rational, Region)>,
    pub dominator: Term,
}

impl SimpleFunctionSpec {
    pub fn value_at(&self, x: &Point) -> Result<Rational, EvalError> {
        let mut v = Rational::zero();
        for (c, r) in &self.entries {
            if r.contains(x)? {
                v += c;
            }
        }
        Ok(v)
    }

    fn on_strict_boundary(&self, x: &Point) -> bool {
        self.entries.iter().any(|(_, r)| r.on_strict_boundary(x))
    }
}

/// Parse a spec file: one `dominator <term>` line and any number of
/// `entry <coefficient> <region>` lines; `#` starts a comment line.
pub fn parse_simple_spec(text: &str, sig: Signature) -> Result<SimpleFunctionSpec, SynthError> {
    let mut dominator = None;
    let mut entries = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let err = |message: String| SynthError::SpecSyntax { line, message };
        if let Some(rest) = l.strip_prefix("dominator ") {
            if dominator.is_some() {
                return Err(err("second dominator line".into()));
            }
            dominator = Some(parse(rest, sig)?);
        } else if let Some(rest) = l.strip_prefix("entry ") {
            let (c, region) = rest
                .trim()
                .split_once(char::is_whitespace)
                .ok_or_else(|| err("expected `entry <coefficient> <region>`".into()))?;
            let c: Rational = c.parse().map_err(|e| err(format!("{e}")))?;
            entries.push((c, parse_region(region)?));
        } else {
            return Err(err(format!("unrecognized line `{l}`")));
        }
    }
    let dominator = dominator.ok_or(SynthError::SpecSyntax {
        line: 0,
        message: "missing `dominator` line".into(),
    })?;
    Ok(SimpleFunctionSpec { entries, dominator })
}

fn check_dominated(spec: &SimpleFunctionSpec, points: &[Point]) -> Result<(), SynthError> {
    let checks: Vec<Result<(), SynthError>> = points
        .par_iter()
        .map(|x| {
            if spec.on_strict_boundary(x) {
                return Ok(());
            }
            let needed = spec.value_at(x)?;
            let got = eval(&spec.dominator, x)?;
            if needed > got {
                return Err(SynthError::DominatorTooSmall {
                    point: x.clone(),
                    needed,
                    got,
                });
            }
            Ok(())
        })
        .collect();
    checks.into_iter().collect()
}

/// `sum_k c_k region_indicator(R_k, g / c_k)`, checked against `spec`
/// values and against the dominator on the grid.
pub fn simple_term(spec: &SimpleFunctionSpec, grid: &VerificationGrid) -> Result<Term, SynthError> {
    if let Some((c, _)) = spec.entries.iter().find(|(c, _)| c.is_negative()) {
        return Err(SynthError::NegativeCoefficient(c.clone()));
    }
    let points = grid.points()?;
    check_dominated(spec, &points)?;
    let mut acc: Option<Term> = None;
    for (c, region) in spec.entries.iter().filter(|(c, _)| !c.is_zero()) {
        let g = Term::scale(c.recip(), spec.dominator.clone());
        let part = Term::scale(c.clone(), region_indicator(region, &g, grid)?);
        acc = Some(match acc {
            None => part,
            Some(a) => Term::add(a, part),
        });
    }
    let term = acc.unwrap_or(Term::Zero);
    let checks: Vec<Result<(), SynthError>> = points
        .par_iter()
        .map(|x| {
            let got = eval(&term, x)?;
            let bound = eval(&spec.dominator, x)?;
            if got > bound {
                return Err(SynthError::DominatorTooSmall {
                    point: x.clone(),
                    needed: got,
                    got: bound,
                });
            }
            if spec.on_strict_boundary(x) {
                return Ok(());
            }
            let expected = spec.value_at(x)?;
            if got != expected {
                return Err(SynthError::VerificationFailed {
                    point: x.clone(),
                    expected,
                    got,
                });
            }
            Ok(())
        })
        .collect();
    checks.into_iter().collect::<Result<(), _>>()?;
    Ok(term)
}

/// `tsup^g s_n` over an increasing finite ladder `s_0 <= s_1 <= ...`,
/// extended constantly. The body is `s_0 + sum_k step(k) (s_k - s_{k-1})`,
/// so it is exactly constant from the last step on.
pub fn ladder_term(
    ladder: &[SimpleFunctionSpec],
    g: &Term,
    grid: &VerificationGrid,
) -> Result<Term, SynthError> {
    if ladder.is_empty() {
        return Err(SynthError::EmptyLadder);
    }
    let points = grid.points()?;
    for (step, pair) in ladder.windows(2).enumerate() {
        for x in &points {
            if pair[0].on_strict_boundary(x) || pair[1].on_strict_boundary(x) {
                continue;
            }
            if pair[1].value_at(x)? < pair[0].value_at(x)? {
                return Err(SynthError::LadderNotIncreasing {
                    step: step + 1,
                    point: x.clone(),
                });
            }
        }
    }
    let steps: Vec<Term> = ladder
        .iter()
        .map(|s| {
            let capped = SimpleFunctionSpec {
                entries: s.entries.clone(),
                dominator: g.clone(),
            };
            simple_term(&capped, grid)
        })
        .collect::<Result<_, _>>()?;
    let mut body = steps[0].clone();
    for k in 1..steps.len() {
        let delta = Term::sub(steps[k].clone(), steps[k - 1].clone());
        body = Term::add(body, Term::indexed_scale(IndexExpr::Step(k as u64), delta));
    }
    let hint = DEFAULT_STABILIZATION_HINT.max(steps.len() as u32);
    Ok(Term::tsup_monotone(
        g.clone(),
        Direction::Increasing,
        hint,
        body,
    ))
}
