use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::arith::Rational;

pub type VarIndex = u32;

/// Which generator set a term is drawn from.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Signature {
    /// `0, +, v, scalar, tsup, trunc`: integrability over arbitrary measures.
    Truncated,
    /// `0, +, v, scalar, tsup, 1`: integrability over finite measures.
    Unital,
    /// The unital generators plus black-box `sq` and `abspow` nodes.
    Extended,
}

impl Signature {
    pub fn name(self) -> &'static str {
        match self {
            Signature::Truncated => "t",
            Signature::Unital => "u",
            Signature::Extended => "ext",
        }
    }
}

impl FromStr for Signature {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "t" => Ok(Signature::Truncated),
            "u" => Ok(Signature::Unital),
            "ext" => Ok(Signature::Extended),
            other => Err(format!(
                "unknown signature `{other}` (expected t, u or ext)"
            )),
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sorted, duplicate-free set of variable indices.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct IndexSet(Vec<VarIndex>);

impl IndexSet {
    pub fn new() -> Self {
        IndexSet(Vec::new())
    }

    pub fn as_slice(&self) -> &[VarIndex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: VarIndex) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = VarIndex> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn max(&self) -> Option<VarIndex> {
        self.0.last().copied()
    }
}

impl FromIterator<VarIndex> for IndexSet {
    fn from_iter<T: IntoIterator<Item = VarIndex>>(iter: T) -> Self {
        let set: BTreeSet<VarIndex> = iter.into_iter().collect();
        IndexSet(set.into_iter().collect())
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Scalar expression in the index `n` of an enclosing monotone schema.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum IndexExpr {
    Const(Rational),
    N,
    /// `2^e`; `e` must evaluate to an integer.
    Pow2(Box<IndexExpr>),
    /// 1 when `n >= k`, else 0.
    Step(u64),
    Add(Box<IndexExpr>, Box<IndexExpr>),
    Sub(Box<IndexExpr>, Box<IndexExpr>),
    Mul(Box<IndexExpr>, Box<IndexExpr>),
    Div(Box<IndexExpr>, Box<IndexExpr>),
    Neg(Box<IndexExpr>),
}

impl IndexExpr {
    /// The index from which this expression is constant in `n`, when one
    /// is evident from the syntax.
    pub fn constant_from(&self) -> Option<u64> {
        match self {
            IndexExpr::Const(_) => Some(0),
            IndexExpr::N => None,
            IndexExpr::Step(k) => Some(*k),
            IndexExpr::Pow2(e) | IndexExpr::Neg(e) => e.constant_from(),
            IndexExpr::Add(a, b)
            | IndexExpr::Sub(a, b)
            | IndexExpr::Mul(a, b)
            | IndexExpr::Div(a, b) => Some(a.constant_from()?.max(b.constant_from()?)),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Increasing => "inc",
            Direction::Decreasing => "dec",
        }
    }
}

pub const DEFAULT_STABILIZATION_HINT: u32 = 64;

/// A finitely described countable family `(f_n)` feeding a truncated sup.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Schema {
    /// `f_n = n*u + v` with `u`, `v` free of the schema's own index.
    Affine { u: Term, v: Term },
    /// `f_n = body[n]`, declared monotone. With `Increasing` the node is the
    /// truncated sup `sup_n (f_n ^ cap)`; with `Decreasing` it is the dual
    /// truncated meet `inf_n (f_n v cap) = -tsup^{-cap} (-f_n)`.
    Monotone {
        direction: Direction,
        hint: u32,
        body: Term,
    },
}

impl Schema {
    /// The first family member `f_0`, free of the schema index.
    pub fn first(&self) -> Term {
        match self {
            Schema::Affine { v, .. } => v.clone(),
            Schema::Monotone { body, .. } => body.instantiate_index(&Rational::zero()),
        }
    }
}

/// A term over one of the signatures. Multi-index suprema are written by
/// nesting truncated-sup nodes.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Proj(VarIndex),
    Zero,
    One,
    Add(Box<Term>, Box<Term>),
    Scale(Rational, Box<Term>),
    /// Scalar depending on the index of the innermost enclosing monotone
    /// schema. Only legal inside such a body.
    IndexedScale(IndexExpr, Box<Term>),
    Join(Box<Term>, Box<Term>),
    Trunc(Box<Term>),
    TruncSup {
        cap: Box<Term>,
        schema: Box<Schema>,
    },
    Square(Box<Term>),
    AbsPow(Rational, Box<Term>),
}

/// Derived operators, expanded into primitives.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Derived {
    Meet,
    Pos,
    NegPart,
    Abs,
}

// Constructors named after the operations they build.
#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn proj(i: VarIndex) -> Term {
        Term::Proj(i)
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::add(a, Term::neg(b))
    }

    pub fn scale(c: impl Into<Rational>, t: Term) -> Term {
        Term::Scale(c.into(), Box::new(t))
    }

    pub fn neg(t: Term) -> Term {
        Term::scale(-1i64, t)
    }

    pub fn indexed_scale(e: IndexExpr, t: Term) -> Term {
        Term::IndexedScale(e, Box::new(t))
    }

    pub fn join(a: Term, b: Term) -> Term {
        Term::Join(Box::new(a), Box::new(b))
    }

    pub fn trunc(t: Term) -> Term {
        Term::Trunc(Box::new(t))
    }

    pub fn tsup_affine(cap: Term, u: Term, v: Term) -> Term {
        Term::TruncSup {
            cap: Box::new(cap),
            schema: Box::new(Schema::Affine { u, v }),
        }
    }

    pub fn tsup_monotone(cap: Term, direction: Direction, hint: u32, body: Term) -> Term {
        Term::TruncSup {
            cap: Box::new(cap),
            schema: Box::new(Schema::Monotone {
                direction,
                hint,
                body,
            }),
        }
    }

    pub fn square(t: Term) -> Term {
        Term::Square(Box::new(t))
    }

    pub fn abs_pow(q: Rational, t: Term) -> Term {
        Term::AbsPow(q, Box::new(t))
    }

    /// `f ^ g = -((-f) v (-g))`.
    pub fn meet(f: Term, g: Term) -> Term {
        Term::neg(Term::join(Term::neg(f), Term::neg(g)))
    }

    /// `f+ = f v 0`.
    pub fn pos(f: Term) -> Term {
        Term::join(f, Term::Zero)
    }

    /// `f- = -(f ^ 0)`.
    pub fn negpart(f: Term) -> Term {
        Term::neg(Term::meet(f, Term::Zero))
    }

    /// `|f| = f+ + f-`.
    pub fn abs(f: Term) -> Term {
        Term::add(Term::pos(f.clone()), Term::negpart(f))
    }

    /// Expand a derived operator. Panics on an arity mismatch.
    pub fn derived(kind: Derived, mut args: Vec<Term>) -> Term {
        match kind {
            Derived::Meet => {
                assert_eq!(args.len(), 2, "meet takes two arguments");
                let g = args.pop().unwrap();
                let f = args.pop().unwrap();
                Term::meet(f, g)
            }
            Derived::Pos | Derived::NegPart | Derived::Abs => {
                assert_eq!(args.len(), 1, "{kind:?} takes one argument");
                let f = args.pop().unwrap();
                match kind {
                    Derived::Pos => Term::pos(f),
                    Derived::NegPart => Term::negpart(f),
                    _ => Term::abs(f),
                }
            }
        }
    }

    fn children(&self) -> Vec<&Term> {
        match self {
            Term::Proj(_) | Term::Zero | Term::One => vec![],
            Term::Add(a, b) | Term::Join(a, b) => vec![a, b],
            Term::Scale(_, t)
            | Term::IndexedScale(_, t)
            | Term::Trunc(t)
            | Term::Square(t)
            | Term::AbsPow(_, t) => vec![t],
            Term::TruncSup { cap, schema } => match schema.as_ref() {
                Schema::Affine { u, v } => vec![cap, u, v],
                Schema::Monotone { body, .. } => vec![cap, body],
            },
        }
    }

    /// Exactly the projection indices occurring anywhere, including caps and
    /// schema bodies.
    pub fn free_vars(&self) -> IndexSet {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out.into_iter().collect()
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarIndex>) {
        if let Term::Proj(i) = self {
            out.insert(*i);
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Name of the first node not in `sig`, if any.
    pub fn signature_violation(&self, sig: Signature) -> Option<&'static str> {
        let here = match (self, sig) {
            (Term::One, Signature::Truncated) => Some("one"),
            (Term::Trunc(_), Signature::Unital | Signature::Extended) => Some("trunc"),
            (Term::Square(_), Signature::Truncated | Signature::Unital) => Some("sq"),
            (Term::AbsPow(..), Signature::Truncated | Signature::Unital) => Some("abspow"),
            _ => None,
        };
        here.or_else(|| {
            self.children()
                .into_iter()
                .find_map(|c| c.signature_violation(sig))
        })
    }

    pub fn has_extended_nodes(&self) -> bool {
        matches!(self, Term::Square(_) | Term::AbsPow(..))
            || self.children().iter().any(|c| c.has_extended_nodes())
    }

    pub fn has_one(&self) -> bool {
        matches!(self, Term::One) || self.children().iter().any(|c| c.has_one())
    }

    /// The smallest signature whose generators (plus derived truncation in
    /// the unital case) build this term.
    pub fn minimal_signature(&self) -> Signature {
        if self.has_extended_nodes() {
            Signature::Extended
        } else if self.has_one() {
            Signature::Unital
        } else {
            Signature::Truncated
        }
    }

    /// Replace index-dependent scalars that refer to the current schema index
    /// by their value at `n`. Nested monotone bodies bind their own index and
    /// are left alone.
    pub fn instantiate_index(&self, n: &Rational) -> Term {
        self.instantiate_with(&|e| crate::eval::eval_index_expr(e, n).ok())
    }

    fn instantiate_with(&self, value: &dyn Fn(&IndexExpr) -> Option<Rational>) -> Term {
        let go = |t: &Term| Box::new(t.instantiate_with(value));
        match self {
            Term::Proj(_) | Term::Zero | Term::One => self.clone(),
            Term::Add(a, b) => Term::Add(go(a), go(b)),
            Term::Join(a, b) => Term::Join(go(a), go(b)),
            Term::Scale(c, t) => Term::Scale(c.clone(), go(t)),
            Term::IndexedScale(e, t) => match value(e) {
                Some(c) => Term::Scale(c, go(t)),
                None => Term::IndexedScale(e.clone(), go(t)),
            },
            Term::Trunc(t) => Term::Trunc(go(t)),
            Term::Square(t) => Term::Square(go(t)),
            Term::AbsPow(q, t) => Term::AbsPow(q.clone(), go(t)),
            Term::TruncSup { cap, schema } => {
                let schema = match schema.as_ref() {
                    Schema::Affine { u, v } => Schema::Affine {
                        u: u.instantiate_with(value),
                        v: v.instantiate_with(value),
                    },
                    Schema::Monotone { .. } => schema.as_ref().clone(),
                };
                Term::TruncSup {
                    cap: go(cap),
                    schema: Box::new(schema),
                }
            }
        }
    }

    /// Index expressions that refer to the current schema index (those not
    /// inside a nested monotone body).
    pub fn outer_index_exprs(&self) -> Vec<&IndexExpr> {
        let mut out = Vec::new();
        self.collect_index_exprs(&mut out);
        out
    }

    fn collect_index_exprs<'a>(&'a self, out: &mut Vec<&'a IndexExpr>) {
        if let Term::IndexedScale(e, _) = self {
            out.push(e);
        }
        match self {
            Term::TruncSup { cap, schema } => {
                cap.collect_index_exprs(out);
                if let Schema::Affine { u, v } = schema.as_ref() {
                    u.collect_index_exprs(out);
                    v.collect_index_exprs(out);
                }
            }
            _ => {
                for c in self.children() {
                    c.collect_index_exprs(out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_examples() {
        assert_eq!(Term::proj(3).free_vars().as_slice(), &[3]);
        let t = Term::add(Term::proj(0), Term::scale(2, Term::proj(5)));
        assert_eq!(t.free_vars().as_slice(), &[0, 5]);
        let t = Term::tsup_affine(Term::proj(1), Term::proj(0), Term::Zero);
        assert_eq!(t.free_vars().as_slice(), &[0, 1]);
        assert!(Term::One.free_vars().is_empty());
    }

    #[test]
    fn signature_membership() {
        let t = Term::add(Term::One, Term::proj(0));
        assert_eq!(t.signature_violation(Signature::Truncated), Some("one"));
        assert_eq!(t.signature_violation(Signature::Unital), None);
        assert_eq!(t.minimal_signature(), Signature::Unital);
        let s = Term::square(Term::proj(0));
        assert_eq!(s.minimal_signature(), Signature::Extended);
        assert_eq!(
            Term::trunc(Term::proj(0)).minimal_signature(),
            Signature::Truncated
        );
    }

    #[test]
    fn constancy_of_index_exprs() {
        let step = IndexExpr::Add(Box::new(IndexExpr::Step(4)), Box::new(IndexExpr::Step(2)));
        assert_eq!(step.constant_from(), Some(4));
        let grow = IndexExpr::Pow2(Box::new(IndexExpr::N));
        assert_eq!(grow.constant_from(), None);
    }

    #[test]
    fn instantiation_skips_nested_monotone_bodies() {
        let inner = Term::tsup_monotone(
            Term::Zero,
            Direction::Increasing,
            8,
            Term::indexed_scale(IndexExpr::N, Term::proj(1)),
        );
        let body = Term::add(
            Term::indexed_scale(IndexExpr::N, Term::proj(0)),
            inner.clone(),
        );
        let at3 = body.instantiate_index(&Rational::from(3));
        assert_eq!(at3, Term::add(Term::scale(3, Term::proj(0)), inner));
        assert_eq!(body.outer_index_exprs().len(), 1);
    }
}
