//! Recursive-descent parser for the term DSL.
//!
//! ```text
//! sum    := join (('+' | '-') join)*
//! join   := unary ('v' unary)*
//! unary  := '-' NUM '*' unary | '-' unary | NUM '*' unary
//!         | '{' iexpr '}' '*' unary          (inside mono bodies only)
//!         | atom
//! atom   := 'x' INT | 'zero' | 'one' | '(' sum ')'
//!         | 'trunc(' sum ')' | 'meet(' sum ',' sum ')'
//!         | 'abs(' sum ')' | 'pos(' sum ')' | 'neg(' sum ')'
//!         | 'sq(' sum ')' | 'abspow(' NUM ',' sum ')'
//!         | 'tsup' '[' 'n' ']' 'cap' '=' sum ':' schema
//! schema := 'n' '*' '(' sum ')' ['+' unary]
//!         | 'mono' '(' ('inc' | 'dec') ',' INT ',' sum ')'
//! iexpr  := iterm (('+' | '-') iterm)*
//! iterm  := ifact (('*' | '/') ifact)*
//! ifact  := NUM | 'n' | 'pow2(' iexpr ')' | 'step(' INT ')'
//!         | '(' iexpr ')' | '-' ifact
//! ```
//!
//! A rational literal is written without inner spaces (`3/2`, `0.25`);
//! `3 / 2` inside braces is a division.

use std::fmt;

use thiserror::Error;

use super::ast::{Direction, IndexExpr, Schema, Signature, Term};
use crate::arith::Rational;

/// Source position, both 1-based.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("signature violation at {pos}: `{node}` is not available in signature {sig}")]
    SignatureViolation {
        pos: Pos,
        node: &'static str,
        sig: Signature,
    },
    #[error("irrational literal `{name}` at {pos}: scalars must be rational")]
    IrrationalLiteral { pos: Pos, name: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::SignatureViolation { pos, .. }
            | ParseError::IrrationalLiteral { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Ident(String),
    Num(Rational),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(r) => write!(f, "number `{r}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

const IRRATIONAL_NAMES: &[&str] = &["pi", "e", "tau", "sqrt", "phi", "ln", "log", "exp"];

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            out.push((Tok::Ident(word), pos));
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let joined = |j: usize| j + 1 < chars.len() && chars[j + 1].is_ascii_digit();
            if i < chars.len() && (chars[i] == '/' || chars[i] == '.') && joined(i) {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let value = lit.parse::<Rational>().map_err(|e| ParseError::Syntax {
                pos,
                message: e.to_string(),
            })?;
            out.push((Tok::Num(value), pos));
        } else if "()[]{},:=+-*/".contains(c) {
            i += 1;
            out.push((Tok::Sym(c), pos));
        } else {
            return Err(ParseError::Syntax {
                pos,
                message: format!("unexpected character `{c}`"),
            });
        }
        col += i - start;
    }
    out.push((Tok::End, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    sig: Signature,
    mono_depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn expect_sym(&mut self, c: char) -> PResult<()> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{c}`"))
        }
    }

    fn expect_ident(&mut self, word: &str) -> PResult<()> {
        if self.is_ident(word) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{word}`"))
        }
    }

    fn number(&mut self) -> PResult<Rational> {
        match self.peek().clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(r)
            }
            _ => self.unexpected("a number"),
        }
    }

    fn integer(&mut self) -> PResult<u64> {
        let pos = self.pos();
        let r = self.number()?;
        match r.to_i64() {
            Some(v) if r.is_integer() && v >= 0 => Ok(v as u64),
            _ => Err(ParseError::Syntax {
                pos,
                message: format!("expected a nonnegative integer, found `{r}`"),
            }),
        }
    }

    fn require(&self, pos: Pos, node: &'static str, allowed: bool) -> PResult<()> {
        if allowed {
            Ok(())
        } else {
            Err(ParseError::SignatureViolation {
                pos,
                node,
                sig: self.sig,
            })
        }
    }

    fn sum(&mut self) -> PResult<Term> {
        let mut acc = self.join()?;
        loop {
            if self.is_sym('+') {
                self.bump();
                acc = Term::add(acc, self.join()?);
            } else if self.is_sym('-') {
                self.bump();
                acc = Term::sub(acc, self.join()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn join(&mut self) -> PResult<Term> {
        let mut acc = self.unary()?;
        while self.is_ident("v") {
            self.bump();
            acc = Term::join(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Sym('-') => {
                self.bump();
                if let Tok::Num(c) = self.peek().clone() {
                    self.bump();
                    self.expect_sym('*')?;
                    Ok(Term::scale(-c, self.unary()?))
                } else {
                    Ok(Term::neg(self.unary()?))
                }
            }
            Tok::Num(c) => {
                self.bump();
                if !self.is_sym('*') {
                    return self.error(format!(
                        "a scalar must multiply a term (`{c}*...`); use `{c}*one` for a constant"
                    ));
                }
                self.bump();
                Ok(Term::scale(c, self.unary()?))
            }
            Tok::Sym('{') => {
                if self.mono_depth == 0 {
                    return self.error("index-dependent scalars are only allowed in mono bodies");
                }
                self.bump();
                let e = self.iexpr()?;
                self.expect_sym('}')?;
                self.expect_sym('*')?;
                Ok(Term::indexed_scale(e, self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn parenthesized(&mut self) -> PResult<Term> {
        self.expect_sym('(')?;
        let t = self.sum()?;
        self.expect_sym(')')?;
        Ok(t)
    }

    fn atom(&mut self) -> PResult<Term> {
        let pos = self.pos();
        let word = match self.peek().clone() {
            Tok::Sym('(') => return self.parenthesized(),
            Tok::Ident(w) => w,
            _ => return self.unexpected("a term"),
        };
        if let Some(idx) = word.strip_prefix('x') {
            if !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit()) {
                self.bump();
                return idx.parse().map(Term::Proj).map_err(|_| ParseError::Syntax {
                    pos,
                    message: format!("variable index `{idx}` out of range"),
                });
            }
        }
        if IRRATIONAL_NAMES.contains(&word.as_str()) {
            return Err(ParseError::IrrationalLiteral { pos, name: word });
        }
        self.bump();
        match word.as_str() {
            "zero" => Ok(Term::Zero),
            "one" => {
                self.require(pos, "one", self.sig != Signature::Truncated)?;
                Ok(Term::One)
            }
            "trunc" => {
                let t = self.parenthesized()?;
                Ok(match self.sig {
                    Signature::Truncated => Term::trunc(t),
                    // with a unit available, truncation is the meet with it
                    Signature::Unital | Signature::Extended => Term::meet(t, Term::One),
                })
            }
            "meet" => {
                self.expect_sym('(')?;
                let a = self.sum()?;
                self.expect_sym(',')?;
                let b = self.sum()?;
                self.expect_sym(')')?;
                Ok(Term::meet(a, b))
            }
            "abs" => Ok(Term::abs(self.parenthesized()?)),
            "pos" => Ok(Term::pos(self.parenthesized()?)),
            "neg" => Ok(Term::negpart(self.parenthesized()?)),
            "sq" => {
                self.require(pos, "sq", self.sig == Signature::Extended)?;
                Ok(Term::square(self.parenthesized()?))
            }
            "abspow" => {
                self.require(pos, "abspow", self.sig == Signature::Extended)?;
                self.expect_sym('(')?;
                let qpos = self.pos();
                let q = self.number()?;
                if !q.is_positive() {
                    return Err(ParseError::Syntax {
                        pos: qpos,
                        message: format!("abspow exponent must be positive, found `{q}`"),
                    });
                }
                self.expect_sym(',')?;
                let t = self.sum()?;
                self.expect_sym(')')?;
                Ok(Term::abs_pow(q, t))
            }
            "tsup" => self.tsup(),
            _ => Err(ParseError::Syntax {
                pos,
                message: format!("unknown name `{word}`"),
            }),
        }
    }

    fn tsup(&mut self) -> PResult<Term> {
        self.expect_sym('[')?;
        self.expect_ident("n")?;
        self.expect_sym(']')?;
        self.expect_ident("cap")?;
        self.expect_sym('=')?;
        let cap = self.sum()?;
        self.expect_sym(':')?;
        let schema =
            if self.is_ident("n") {
                self.bump();
                self.expect_sym('*')?;
                let u = self.parenthesized()?;
                let v = if self.is_sym('+') {
                    self.bump();
                    self.unary()?
                } else {
                    Term::Zero
                };
                Schema::Affine { u, v }
            } else if self.is_ident("mono") {
                self.bump();
                self.expect_sym('(')?;
                let direction = if self.is_ident("inc") {
                    Direction::Increasing
                } else if self.is_ident("dec") {
                    Direction::Decreasing
                } else {
                    return self.unexpected("`inc` or `dec`");
                };
                self.bump();
                self.expect_sym(',')?;
                let hpos = self.pos();
                let hint = self.integer()?;
                let hint = u32::try_from(hint).ok().filter(|h| *h > 0).ok_or_else(|| {
                    ParseError::Syntax {
                        pos: hpos,
                        message: "stabilization hint must be a positive 32-bit integer".into(),
                    }
                })?;
                self.expect_sym(',')?;
                self.mono_depth += 1;
                let body = self.sum();
                self.mono_depth -= 1;
                let body = body?;
                self.expect_sym(')')?;
                Schema::Monotone {
                    direction,
                    hint,
                    body,
                }
            } else {
                return self.unexpected("a schema (`n*(...)` or `mono(...)`)");
            };
        Ok(Term::TruncSup {
            cap: Box::new(cap),
            schema: Box::new(schema),
        })
    }

    fn iexpr(&mut self) -> PResult<IndexExpr> {
        let mut acc = self.iterm()?;
        loop {
            if self.is_sym('+') {
                self.bump();
                acc = IndexExpr::Add(Box::new(acc), Box::new(self.iterm()?));
            } else if self.is_sym('-') {
                self.bump();
                acc = IndexExpr::Sub(Box::new(acc), Box::new(self.iterm()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn iterm(&mut self) -> PResult<IndexExpr> {
        let mut acc = self.ifact()?;
        loop {
            if self.is_sym('*') {
                self.bump();
                acc = IndexExpr::Mul(Box::new(acc), Box::new(self.ifact()?));
            } else if self.is_sym('/') {
                self.bump();
                acc = IndexExpr::Div(Box::new(acc), Box::new(self.ifact()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn ifact(&mut self) -> PResult<IndexExpr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(c) => {
                self.bump();
                Ok(IndexExpr::Const(c))
            }
            Tok::Sym('-') => {
                self.bump();
                if let Tok::Num(c) = self.peek().clone() {
                    self.bump();
                    Ok(IndexExpr::Const(-c))
                } else {
                    Ok(IndexExpr::Neg(Box::new(self.ifact()?)))
                }
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.iexpr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(w) => {
                self.bump();
                match w.as_str() {
                    "n" => Ok(IndexExpr::N),
                    "pow2" => {
                        self.expect_sym('(')?;
                        let e = self.iexpr()?;
                        self.expect_sym(')')?;
                        Ok(IndexExpr::Pow2(Box::new(e)))
                    }
                    "step" => {
                        self.expect_sym('(')?;
                        let k = self.integer()?;
                        self.expect_sym(')')?;
                        Ok(IndexExpr::Step(k))
                    }
                    name if IRRATIONAL_NAMES.contains(&name) => {
                        Err(ParseError::IrrationalLiteral {
                            pos,
                            name: w.clone(),
                        })
                    }
                    _ => Err(ParseError::Syntax {
                        pos,
                        message: format!("unknown index function `{w}`"),
                    }),
                }
            }
            _ => self.unexpected("an index expression"),
        }
    }
}

/// Parse `text` as a term over `sig`.
///
/// Under the unital signatures `trunc(t)` is accepted and expanded to
/// `meet(t, one)`; the resulting term contains no truncation node.
pub fn parse(text: &str, sig: Signature) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        sig,
        mono_depth: 0,
    };
    let t = p.sum()?;
    if *p.peek() != Tok::End {
        return p.unexpected("end of input");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        parse(s, Signature::Truncated).unwrap()
    }

    #[test]
    fn projections_and_precedence() {
        assert_eq!(t("x0"), Term::proj(0));
        assert_eq!(
            t("x0 + 2*x1 v x2"),
            Term::add(
                Term::proj(0),
                Term::join(Term::scale(2, Term::proj(1)), Term::proj(2))
            )
        );
        assert_eq!(
            t("x0 - x1"),
            Term::add(Term::proj(0), Term::scale(-1, Term::proj(1)))
        );
        assert_eq!(
            t("-3/2*x0"),
            Term::scale(Rational::new(-3, 2), Term::proj(0))
        );
        assert_eq!(
            t("0.25*x0"),
            Term::scale(Rational::new(1, 4), Term::proj(0))
        );
    }

    #[test]
    fn affine_schema() {
        let got = t("tsup[n] cap=trunc(x0) : n*(x0 - trunc(x0))");
        let x = Term::proj(0);
        let want = Term::tsup_affine(
            Term::trunc(x.clone()),
            Term::sub(x.clone(), Term::trunc(x)),
            Term::Zero,
        );
        assert_eq!(got, want);
    }

    #[test]
    fn monotone_schema_with_index_scalars() {
        let got = t("tsup[n] cap=zero : mono(inc, 16, {pow2(n) - 1}*x0)");
        let e = IndexExpr::Sub(
            Box::new(IndexExpr::Pow2(Box::new(IndexExpr::N))),
            Box::new(IndexExpr::Const(Rational::one())),
        );
        let want = Term::tsup_monotone(
            Term::Zero,
            Direction::Increasing,
            16,
            Term::indexed_scale(e, Term::proj(0)),
        );
        assert_eq!(got, want);
        assert!(parse("{n}*x0", Signature::Truncated).is_err());
    }

    #[test]
    fn signature_errors() {
        let err = parse("one + x0", Signature::Truncated).unwrap_err();
        assert!(matches!(
            err,
            ParseError::SignatureViolation { node: "one", .. }
        ));
        assert!(matches!(
            parse("sq(x0)", Signature::Unital),
            Err(ParseError::SignatureViolation { node: "sq", .. })
        ));
        assert_eq!(
            parse("trunc(x0)", Signature::Unital).unwrap(),
            Term::meet(Term::proj(0), Term::One)
        );
    }

    #[test]
    fn positions_and_irrationals() {
        let err = parse("x0 +\n  ?", Signature::Truncated).unwrap_err();
        assert_eq!(err.pos(), Pos { line: 2, col: 3 });
        assert!(matches!(
            parse("pi*x0", Signature::Truncated),
            Err(ParseError::IrrationalLiteral { .. })
        ));
        assert!(parse("x0 x1", Signature::Truncated).is_err());
        assert!(parse("3", Signature::Truncated).is_err());
    }

    #[test]
    fn printer_round_trip_examples() {
        for s in [
            "x0 + -1*x1",
            "(x0 + x1) v x2",
            "x0 v (x1 v x2)",
            "2*(tsup[n] cap=x0 : n*(x1) + x2)",
            "tsup[n] cap=(tsup[n] cap=x1 : n*(x0)) : mono(dec, 8, {(3/2) * n / 2}*x0 v {-(n)}*x1)",
            "abspow(1/2, sq(x0))",
        ] {
            let sig = Signature::Extended;
            let a = parse(s, sig).unwrap();
            assert_eq!(parse(&a.to_string(), sig).unwrap(), a, "{s} -> {a}");
        }
    }
}
