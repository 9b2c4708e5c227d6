//! Concrete carriers for the varieties: the rationals, finite powers `Q^X`
//! and quotients of `Q^X` by the ideal of subsets of a fixed null set.
//!
//! Elements are vectors over the canonical carrier. For a quotient that is
//! the restriction to `X \ N`, so equality in the model is plain vector
//! equality and every operation stays pointwise.

mod identities;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::arith::{PiecewiseAffine, Rational};

pub use identities::{check_identity, IdentityId, IdentityOutcome, IdentityReport};

pub type Element = Vec<Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid model `{0}`: expected r, power:K or quotient:K:N")]
    InvalidSpec(String),
    #[error("null set of size {null} leaves an empty carrier in dimension {dim}")]
    EmptyCarrier { dim: usize, null: usize },
    #[error("a truncated sup needs a nonempty family")]
    EmptyFamily,
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
}

/// The null set of `Quotient { dim, null }` is the last `null` points of `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Reals,
    Power { dim: usize },
    Quotient { dim: usize, null: usize },
}

impl Model {
    pub fn power(dim: usize) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::EmptyCarrier { dim, null: 0 });
        }
        Ok(Model::Power { dim })
    }

    pub fn quotient(dim: usize, null: usize) -> Result<Self, ModelError> {
        if null >= dim {
            return Err(ModelError::EmptyCarrier { dim, null });
        }
        Ok(Model::Quotient { dim, null })
    }

    /// Length of the canonical representative.
    pub fn carrier_len(&self) -> usize {
        match *self {
            Model::Reals => 1,
            Model::Power { dim } => dim,
            Model::Quotient { dim, null } => dim - null,
        }
    }

    /// Length of the vectors the model is a quotient of.
    pub fn base_len(&self) -> usize {
        match *self {
            Model::Reals => 1,
            Model::Power { dim } | Model::Quotient { dim, .. } => dim,
        }
    }

    pub fn zero(&self) -> Element {
        vec![Rational::zero(); self.carrier_len()]
    }

    /// The weak unit, fixed to the all-ones vector.
    pub fn unit(&self) -> Element {
        vec![Rational::one(); self.carrier_len()]
    }

    pub fn constant(&self, c: &Rational) -> Element {
        vec![c.clone(); self.carrier_len()]
    }

    pub fn check(&self, e: &[Rational]) -> Result<(), ModelError> {
        if e.len() != self.carrier_len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.carrier_len(),
                got: e.len(),
            });
        }
        Ok(())
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        (0..self.carrier_len())
            .map(|_| random_coordinate(rng))
            .collect()
    }

    /// Class of a base vector: its restriction to `X \ N`.
    pub fn quotient_map(&self, v: &[Rational]) -> Result<Element, ModelError> {
        if v.len() != self.base_len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.base_len(),
                got: v.len(),
            });
        }
        Ok(v[..self.carrier_len()].to_vec())
    }

    /// Representative of a class, zero on `N`.
    pub fn section(&self, e: &[Rational]) -> Result<Vec<Rational>, ModelError> {
        self.check(e)?;
        let mut out = e.to_vec();
        out.resize(self.base_len(), Rational::zero());
        Ok(out)
    }

    /// Truncated sup of a family with the given cap, coordinatewise.
    pub fn truncsup(&self, cap: &[Rational], schema: &ModelSchema) -> Result<Element, ModelError> {
        self.check(cap)?;
        let family = schema.family(self)?;
        Ok(truncsup_family(cap, &family))
    }
}

/// Picks the kink values `{0, +-1, +-2, 1/2}` one time in ten, otherwise a
/// rational with numerator and denominator of magnitude at most 1000.
pub fn random_coordinate<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    const KINKS: [(i64, i64); 6] = [(0, 1), (1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2)];
    if rng.random_range(0..10) == 0 {
        let (n, d) = KINKS[rng.random_range(0..KINKS.len())];
        return Rational::new(n, d);
    }
    Rational::new(rng.random_range(-1000..=1000), rng.random_range(1..=1000))
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Reals => write!(f, "r"),
            Model::Power { dim } => write!(f, "power:{dim}"),
            Model::Quotient { dim, null } => write!(f, "quotient:{dim}:{null}"),
        }
    }
}

impl FromStr for Model {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        let bad = || ModelError::InvalidSpec(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["r"] => Ok(Model::Reals),
            ["power", k] => Model::power(num(k)?),
            ["quotient", k, n] => Model::quotient(num(k)?, num(n)?),
            _ => Err(bad()),
        }
    }
}

/// A sequence of elements `n -> f_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSchema {
    /// `f_n = n*u + v`.
    Affine { u: Element, v: Element },
    /// `f_n = items[n]`, then constant at the last item.
    List(Vec<Element>),
}

impl ModelSchema {
    fn family(&self, model: &Model) -> Result<Family, ModelError> {
        match self {
            ModelSchema::Affine { u, v } => {
                model.check(u)?;
                model.check(v)?;
                Ok(Family::affine(u, v))
            }
            ModelSchema::List(items) => {
                if items.is_empty() {
                    return Err(ModelError::EmptyFamily);
                }
                for item in items {
                    model.check(item)?;
                }
                Ok(Family::list(items, model.carrier_len()))
            }
        }
    }
}

/// Per-coordinate view of a sequence: coordinate `i` is `n -> f_n[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Family(pub(crate) Vec<PiecewiseAffine>);

impl Family {
    pub(crate) fn affine(u: &[Rational], v: &[Rational]) -> Self {
        Family(
            u.iter()
                .zip(v)
                .map(|(a, b)| PiecewiseAffine::affine(a.clone(), b.clone()))
                .collect(),
        )
    }

    pub(crate) fn list(items: &[Element], len: usize) -> Self {
        Family(
            (0..len)
                .map(|i| {
                    let column: Vec<Rational> = items.iter().map(|e| e[i].clone()).collect();
                    PiecewiseAffine::steps(&column)
                })
                .collect(),
        )
    }

    pub(crate) fn constant(e: &[Rational]) -> Self {
        Family(
            e.iter()
                .map(|c| PiecewiseAffine::constant(c.clone()))
                .collect(),
        )
    }

    pub(crate) fn zip(
        &self,
        other: &Family,
        f: impl Fn(&PiecewiseAffine, &PiecewiseAffine) -> PiecewiseAffine,
    ) -> Family {
        Family(self.0.iter().zip(&other.0).map(|(a, b)| f(a, b)).collect())
    }

    pub(crate) fn with_elem(
        &self,
        e: &[Rational],
        f: impl Fn(&PiecewiseAffine, &Rational) -> PiecewiseAffine,
    ) -> Family {
        Family(self.0.iter().zip(e).map(|(a, b)| f(a, b)).collect())
    }

    pub(crate) fn map(&self, f: impl Fn(&PiecewiseAffine) -> PiecewiseAffine) -> Family {
        Family(self.0.iter().map(f).collect())
    }
}

pub(crate) fn truncsup_family(cap: &[Rational], family: &Family) -> Element {
    cap.iter()
        .zip(&family.0)
        .map(|(c, f)| crate::arith::pwa_sup_capped(f, c))
        .collect()
}

/// Pointwise operations on canonical representatives.
pub mod ops {
    use super::Element;
    use crate::arith::Rational;

    fn zip(
        a: &[Rational],
        b: &[Rational],
        f: impl Fn(&Rational, &Rational) -> Rational,
    ) -> Element {
        assert_eq!(a.len(), b.len(), "operands from different models");
        a.iter().zip(b).map(|(x, y)| f(x, y)).collect()
    }

    pub fn add(a: &[Rational], b: &[Rational]) -> Element {
        zip(a, b, |x, y| x + y)
    }

    pub fn sub(a: &[Rational], b: &[Rational]) -> Element {
        zip(a, b, |x, y| x - y)
    }

    pub fn scale(c: &Rational, a: &[Rational]) -> Element {
        a.iter().map(|x| c * x).collect()
    }

    pub fn join(a: &[Rational], b: &[Rational]) -> Element {
        zip(a, b, |x, y| x.clone().max(y.clone()))
    }

    pub fn meet(a: &[Rational], b: &[Rational]) -> Element {
        zip(a, b, |x, y| x.clone().min(y.clone()))
    }

    pub fn trunc(a: &[Rational]) -> Element {
        a.iter().map(|x| x.clone().min(Rational::one())).collect()
    }

    pub fn pos(a: &[Rational]) -> Element {
        a.iter().map(|x| x.clone().max(Rational::zero())).collect()
    }

    pub fn negpart(a: &[Rational]) -> Element {
        a.iter().map(|x| (-x).max(Rational::zero())).collect()
    }

    pub fn abs(a: &[Rational]) -> Element {
        a.iter().map(Rational::abs).collect()
    }

    pub fn le(a: &[Rational], b: &[Rational]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x <= y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    fn v(xs: &[i64]) -> Element {
        xs.iter().map(|&x| r(x)).collect()
    }

    #[test]
    fn affine_truncsup_is_coordinatewise() {
        let m = Model::power(2).unwrap();
        let schema = ModelSchema::Affine {
            u: v(&[1, 0]),
            v: v(&[0, 2]),
        };
        assert_eq!(m.truncsup(&v(&[5, 5]), &schema).unwrap(), v(&[5, 2]));
    }

    #[test]
    fn constant_family_is_idempotent() {
        let m = Model::power(3).unwrap();
        let c = v(&[-4, 0, 9]);
        let schema = ModelSchema::List(vec![c.clone()]);
        assert_eq!(m.truncsup(&c, &schema).unwrap(), c);
    }

    #[test]
    fn quotient_forgets_the_null_set() {
        let m = Model::quotient(3, 1).unwrap();
        let a = m.quotient_map(&v(&[1, 2, 7])).unwrap();
        let b = m.quotient_map(&v(&[1, 2, 9])).unwrap();
        assert_eq!(a, b);
        let s = m.section(&a).unwrap();
        assert_eq!(&s[..2], &v(&[1, 2])[..]);
        assert_eq!(m.quotient_map(&s).unwrap(), a);
        assert!(matches!(
            m.quotient_map(&v(&[1, 2])),
            Err(ModelError::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn model_specs_round_trip() {
        for s in ["r", "power:3", "quotient:5:2"] {
            assert_eq!(s.parse::<Model>().unwrap().to_string(), s);
        }
        assert!("quotient:2:2".parse::<Model>().is_err());
        assert!("power".parse::<Model>().is_err());
    }

    #[test]
    fn positive_weak_units_rescale_to_one() {
        // f -> f / w is a lattice isomorphism of Q^X taking w to the unit
        // and f /\ w to trunc(f / w).
        let m = Model::power(3).unwrap();
        let w = vec![Rational::new(1, 2), r(3), r(7)];
        let f = v(&[2, -1, 5]);
        let div = |a: &[Rational]| -> Element { a.iter().zip(&w).map(|(x, y)| x / y).collect() };
        assert_eq!(div(&w), m.unit());
        assert_eq!(div(&ops::meet(&f, &w)), ops::trunc(&div(&f)));
    }
}
