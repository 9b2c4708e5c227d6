//! Linear-bound certificates, interval enclosures and classification.
//!
//! A certificate `(k, lambda)` for `t` guarantees
//! `|t(x)| <= k + sum_j lambda_j |x_j|` at every point. `k = 0` means `t`
//! maps p-integrable inputs to p-integrable outputs over every measure;
//! any `k` suffices over finite measures.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::arith::{Interval, Rational};
use crate::eval::{EvalError, Operation, Point};
use crate::term::{Direction, Schema, Signature, Term, VarIndex};

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BoundCertificate {
    pub k: Rational,
    /// Only strictly positive coefficients are stored.
    pub lambda: BTreeMap<VarIndex, Rational>,
}

impl BoundCertificate {
    pub fn constant(k: Rational) -> Self {
        BoundCertificate {
            k,
            lambda: BTreeMap::new(),
        }
    }

    pub fn var(i: VarIndex) -> Self {
        BoundCertificate {
            k: Rational::zero(),
            lambda: [(i, Rational::one())].into(),
        }
    }

    pub fn lambda_at(&self, i: VarIndex) -> Rational {
        self.lambda.get(&i).cloned().unwrap_or_default()
    }

    /// The bound `k + sum_j lambda_j |x_j|` at `x`; absent coordinates count as 0.
    pub fn bound_at(&self, x: &Point) -> Rational {
        let mut b = self.k.clone();
        for (i, l) in &self.lambda {
            if let Some(v) = x.get(i) {
                b += l * &v.abs();
            }
        }
        b
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let c = c.abs();
        BoundCertificate {
            k: &self.k * &c,
            lambda: self.lambda.iter().map(|(i, l)| (*i, l * &c)).collect(),
        }
        .pruned()
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut lambda = self.lambda.clone();
        for (i, l) in &other.lambda {
            *lambda.entry(*i).or_default() += l;
        }
        BoundCertificate {
            k: &self.k + &other.k,
            lambda,
        }
    }

    pub fn max(&self, other: &Self) -> Self {
        let mut lambda = self.lambda.clone();
        for (i, l) in &other.lambda {
            let e = lambda.entry(*i).or_default();
            if l > e {
                *e = l.clone();
            }
        }
        BoundCertificate {
            k: self.k.clone().max(other.k.clone()),
            lambda,
        }
    }

    fn pruned(mut self) -> Self {
        self.lambda.retain(|_, l| !l.is_zero());
        self
    }
}

impl fmt::Display for BoundCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} lambda={{", self.k)?;
        for (n, (i, l)) in self.lambda.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}:{l}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("no linear bound can be inferred: term contains `{0}`")]
    NotCertifiable(&'static str),
    #[error("box does not cover variable x{0}")]
    MissingVariable(VarIndex),
}

/// How the bound of `f v g` is assembled from the bounds of `f` and `g`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum JoinRule {
    /// `|f v g| <= |f| v |g|`.
    #[default]
    Max,
    /// `|f v g| <= |f| + |g|`, looser.
    Sum,
}

/// Infer a certificate with the default join rule.
pub fn infer_bound(t: &Term) -> Result<BoundCertificate, CertifyError> {
    infer_bound_with(t, JoinRule::Max)
}

pub fn infer_bound_with(t: &Term, rule: JoinRule) -> Result<BoundCertificate, CertifyError> {
    let go = |s: &Term| infer_bound_with(s, rule);
    Ok(match t {
        Term::Proj(i) => BoundCertificate::var(*i),
        Term::Zero => BoundCertificate::default(),
        Term::One => BoundCertificate::constant(Rational::one()),
        Term::Scale(c, s) => go(s)?.scaled(c),
        Term::Add(a, b) => go(a)?.sum(&go(b)?),
        Term::Join(a, b) => match rule {
            JoinRule::Max => go(a)?.max(&go(b)?),
            JoinRule::Sum => go(a)?.sum(&go(b)?),
        },
        // |min(f, 1)| <= |f|
        Term::Trunc(s) => go(s)?,
        // the value lies between f_0 ^ g and g (dually for a decreasing schema)
        Term::TruncSup { cap, schema } => {
            let first = schema.first();
            if !first.outer_index_exprs().is_empty() {
                return Err(CertifyError::NotCertifiable("an undefined index scalar"));
            }
            go(cap)?.sum(&go(&first)?)
        }
        Term::IndexedScale(..) => {
            return Err(CertifyError::NotCertifiable(
                "an index scalar outside a mono body",
            ))
        }
        Term::Square(_) => return Err(CertifyError::NotCertifiable("sq")),
        Term::AbsPow(..) => return Err(CertifyError::NotCertifiable("abspow")),
    })
}

/// Exact check of `|op(x)| <= k + sum_j lambda_j |x_j|`.
pub fn check_certificate(
    op: &dyn Operation,
    cert: &BoundCertificate,
    x: &Point,
) -> Result<bool, EvalError> {
    Ok(op.apply(x)?.abs() <= cert.bound_at(x))
}

/// Bits of precision for enclosures of irrational powers.
const POW_PRECISION_BITS: u32 = 32;

/// Sound enclosure of the image of the box under `t`.
pub fn interval_bound(
    t: &Term,
    bounds: &BTreeMap<VarIndex, Interval>,
) -> Result<Interval, CertifyError> {
    let go = |s: &Term| interval_bound(s, bounds);
    Ok(match t {
        Term::Proj(i) => bounds
            .get(i)
            .cloned()
            .ok_or(CertifyError::MissingVariable(*i))?,
        Term::Zero => Interval::point(Rational::zero()),
        Term::One => Interval::point(Rational::one()),
        Term::Add(a, b) => go(a)?.add(&go(b)?),
        Term::Scale(c, s) => go(s)?.scale(c),
        Term::Join(a, b) => go(a)?.join(&go(b)?),
        Term::Trunc(s) => go(s)?.min_with(&Rational::one()),
        Term::Square(s) => go(s)?.square(),
        Term::AbsPow(q, s) => {
            let a = go(s)?.abs();
            let lo = a.lo().pow_bounds(q, POW_PRECISION_BITS).0;
            let hi = a.hi().pow_bounds(q, POW_PRECISION_BITS).1;
            Interval::new(lo, hi).expect("x^q is monotone on x >= 0")
        }
        Term::TruncSup { cap, schema } => {
            let g = go(cap)?;
            let first = schema.first();
            if !first.outer_index_exprs().is_empty() {
                return Err(CertifyError::NotCertifiable("an undefined index scalar"));
            }
            let f0 = go(&first)?;
            let decreasing = matches!(
                schema.as_ref(),
                Schema::Monotone {
                    direction: Direction::Decreasing,
                    ..
                }
            );
            if decreasing {
                Interval::new(g.lo().clone(), f0.join(&g).hi().clone())
            } else {
                Interval::new(f0.meet(&g).lo().clone(), g.hi().clone())
            }
            .expect("ordered by construction")
        }
        Term::IndexedScale(..) => {
            return Err(CertifyError::NotCertifiable(
                "an index scalar outside a mono body",
            ))
        }
    })
}

/// The symmetric box `[-m, m]` on every free variable of `t`.
pub fn symmetric_box(t: &Term, m: &Rational) -> BTreeMap<VarIndex, Interval> {
    t.free_vars()
        .iter()
        .map(|i| (i, Interval::symmetric(m.clone())))
        .collect()
}

/// Half-widths of the boxes used when the caller supplies none.
pub const DEFAULT_BOX_RADII: [i64; 3] = [1, 3, 10];

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Classification {
    pub signature: Signature,
    /// Preserves p-integrability over every measure space.
    pub preserves_integrability: bool,
    /// Preserves p-integrability over every finite measure space.
    pub preserves_finite_measure_integrability: bool,
    /// Maps bounded inputs to bounded outputs.
    pub preserves_infty_integrability: bool,
    pub certificate: Option<BoundCertificate>,
    pub box_bound_witness: Option<(BTreeMap<VarIndex, Interval>, Interval)>,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "integrability={} finite={} infty={}",
            self.preserves_integrability,
            self.preserves_finite_measure_integrability,
            self.preserves_infty_integrability
        )?;
        match &self.certificate {
            Some(c) => write!(f, "\n{c}")?,
            None => f.write_str("\ncertificate=none")?,
        }
        if let Some((bx, iv)) = &self.box_bound_witness {
            f.write_str("\nbox")?;
            for (i, side) in bx {
                write!(f, " x{i}={side}")?;
            }
            write!(f, " -> {iv}")?;
        }
        Ok(())
    }
}

/// Classify `t` by the smallest signature containing it.
///
/// Certifiable terms get their flags from the inferred certificate. For
/// terms with black-box nodes only boundedness is decided, on `boxes` (or
/// on symmetric default boxes when none are given); the other two flags
/// stay false since refuting them takes a witness search.
pub fn classify(
    t: &Term,
    boxes: &[BTreeMap<VarIndex, Interval>],
) -> Result<Classification, CertifyError> {
    let signature = t.minimal_signature();
    let owned: Vec<BTreeMap<VarIndex, Interval>>;
    let boxes = if boxes.is_empty() && signature == Signature::Extended {
        owned = DEFAULT_BOX_RADII
            .iter()
            .map(|m| symmetric_box(t, &Rational::from(*m)))
            .collect();
        &owned[..]
    } else {
        boxes
    };
    let mut images = Vec::with_capacity(boxes.len());
    for bx in boxes {
        images.push(interval_bound(t, bx)?);
    }
    let box_bound_witness = boxes.first().cloned().zip(images.first().cloned());
    let (certificate, integ, finite) = match signature {
        Signature::Extended => (None, false, false),
        _ => {
            let cert = infer_bound(t)?;
            let zero_k = cert.k.is_zero();
            (Some(cert), zero_k, true)
        }
    };
    Ok(Classification {
        signature,
        preserves_integrability: integ,
        preserves_finite_measure_integrability: finite,
        // every image enclosure is a finite interval
        preserves_infty_integrability: true,
        certificate,
        box_bound_witness,
    })
}
