//! Discrete measure spaces on which an operation without a linear bound
//! fails to preserve p-integrability.
//!
//! For each `n` a point `v^n` is found with
//! `|tau(v^n)| > r_n * sum_{j<n} |v^n_j|`, where `r_n >= 2^(n/p)` is rational.
//! Atom `A_n` then gets weight `1/|tau(v^n)|^p` and coordinate `i` takes the
//! value `v^n_i` on it. Every term of the image integral equals 1, while the
//! tail of coordinate `i`'s integral past atom `i` is below `sum 2^-n`.
//!
//! In finite mode the target also carries the offset `(1/b_n)^(1/p)` with
//! `b_n = 2^-(n+1)`, which keeps the total mass below 1.

mod file;
mod partition;
mod search;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::arith::Rational;
use crate::certify::BoundCertificate;
use crate::eval::{EvalError, Operation, Point};
use crate::term::VarIndex;

pub use file::{read_witness, write_witness, WitnessFile, WitnessFileError};
pub use partition::{
    conditionally_partitionable_atoms, finite_atom_weight, finite_model_mass, finite_row_mass,
    finite_set_mass, partitionable_atoms, unbounded_atom_weight, unbounded_set_mass, AtomSet,
    PartitionError,
};
pub use search::{search, Hit, SearchConfig};

/// Grid precision, in bits, for rational bounds on irrational powers.
const POWER_PRECISION_BITS: u32 = 32;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    /// Every measure space.
    Arbitrary,
    /// Finite measure spaces.
    Finite,
}

impl Mode {
    pub fn letter(self) -> char {
        match self {
            Mode::Arbitrary => 'A',
            Mode::Finite => 'F',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("exponent p = {0} must be a rational >= 1 with a small denominator")]
    InvalidExponent(Rational),
    #[error("no violating point found for n = {n} within {probes} probes (inconclusive)")]
    NotFound { n: usize, probes: usize },
    #[error("table for x{var} has {got} values, expected {expected}")]
    ShapeMismatch {
        var: VarIndex,
        got: usize,
        expected: usize,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WitnessConfig {
    pub p: Rational,
    pub mode: Mode,
    pub atoms: usize,
    pub search: SearchConfig,
    /// Image sum required for a divergence verdict; defaults to the number
    /// of atoms, halved for fractional `p`.
    pub threshold: Option<Rational>,
}

impl WitnessConfig {
    pub fn new(p: Rational, mode: Mode, atoms: usize) -> Result<Self, WitnessError> {
        check_exponent(&p)?;
        Ok(WitnessConfig {
            p,
            mode,
            atoms,
            search: SearchConfig::default(),
            threshold: None,
        })
    }
}

fn check_exponent(p: &Rational) -> Result<(), WitnessError> {
    let small = p.denom() <= &num_bigint::BigInt::from(1024);
    if *p >= 1 && small {
        Ok(())
    } else {
        Err(WitnessError::InvalidExponent(p.clone()))
    }
}

/// A rational `r >= 2^e`; exact when `2^e` is rational.
fn two_pow_upper(e: &Rational) -> Rational {
    Rational::from(2).pow_upper(e, POWER_PRECISION_BITS)
}

/// `|x|^p` when rational, else a rational upper bound.
fn abs_pow_upper(x: &Rational, p: &Rational) -> Rational {
    x.abs().pow_upper(p, POWER_PRECISION_BITS)
}

/// `|x|^p` when rational, else a rational lower bound.
fn abs_pow_lower(x: &Rational, p: &Rational) -> Rational {
    x.abs().pow_bounds(p, POWER_PRECISION_BITS).0
}

/// `2^(n/p)` and, in finite mode, `2^((n+1)/p)`, rounded up.
struct TargetParts {
    n: usize,
    growth: Rational,
    offset: Option<Rational>,
}

impl TargetParts {
    fn new(n: usize, p: &Rational, mode: Mode) -> Self {
        let growth = two_pow_upper(&(Rational::from(n) / p));
        let offset = (mode == Mode::Finite).then(|| two_pow_upper(&(Rational::from(n + 1) / p)));
        TargetParts { n, growth, offset }
    }

    fn at(&self, v: &Point) -> Rational {
        let mass: Rational = v.range(..self.n as VarIndex).map(|(_, x)| x.abs()).sum();
        let mut target = &self.growth * &mass;
        if let Some(offset) = &self.offset {
            target += offset;
        }
        target
    }
}

/// The right-hand side the value at `v` must strictly exceed at index `n`.
pub fn violation_target(n: usize, v: &Point, p: &Rational, mode: Mode) -> Rational {
    TargetParts::new(n, p, mode).at(v)
}

/// A point `v^n` meeting the strict inequality for index `n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ViolationEntry {
    pub n: usize,
    pub point: Point,
    pub value: Rational,
    pub probes: usize,
}

/// Search for `v^n`. `NotFound` only means the budget ran out.
pub fn find_violation(
    op: &dyn Operation,
    n: usize,
    cfg: &WitnessConfig,
) -> Result<ViolationEntry, WitnessError> {
    check_exponent(&cfg.p)?;
    let target = TargetParts::new(n, &cfg.p, cfg.mode);
    let hit = search(
        op,
        |v, value| value.abs() > target.at(v),
        &cfg.search,
        n as u64,
    )?;
    let Some(hit) = hit else {
        return Err(WitnessError::NotFound {
            n,
            probes: cfg.search.budget,
        });
    };
    let again = op.apply(&hit.point)?;
    assert!(
        again == hit.value && again.abs() > target.at(&hit.point),
        "search returned a point that fails the target"
    );
    Ok(ViolationEntry {
        n,
        point: hit.point,
        value: hit.value,
        probes: hit.probes,
    })
}

/// Search for a point where `|op(x)| > k + sum_j lambda_j |x_j|`.
pub fn defeat_certificate(
    op: &dyn Operation,
    cert: &BoundCertificate,
    cfg: &SearchConfig,
) -> Result<Option<Hit>, EvalError> {
    search(op, |x, v| v.abs() > cert.bound_at(x), cfg, 0)
}

/// Atom weights `mu(A_n)`; the remainder set carries no mass.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DiscreteMeasureSpace {
    pub atoms: Vec<(String, Rational)>,
    pub remainder: (String, Rational),
}

impl DiscreteMeasureSpace {
    pub fn from_weights(weights: &[Rational]) -> Self {
        DiscreteMeasureSpace {
            atoms: weights
                .iter()
                .enumerate()
                .map(|(n, w)| (format!("A{n}"), w.clone()))
                .collect(),
            remainder: ("C".to_string(), Rational::zero()),
        }
    }

    pub fn weights(&self) -> Vec<Rational> {
        self.atoms.iter().map(|(_, w)| w.clone()).collect()
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms.iter().map(|(_, w)| w).sum::<Rational>() + self.remainder.1.clone()
    }
}

/// Per-variable atom tables: `tables[i][n]` is the value of `f_i` on `A_n`.
pub type Tables = BTreeMap<VarIndex, Vec<Rational>>;

/// Atom weight for a value `tau`: `1/|tau|^p` when rational; otherwise a
/// rational `w <= 1/|tau|^p` with `w |tau|^p >= 1/2`.
pub fn atom_weight(tau: &Rational, p: &Rational) -> Rational {
    let m = tau.abs();
    if let Some(exact) = m.pow_exact(p) {
        return exact.recip();
    }
    let two = Rational::from(2);
    let mut bits = POWER_PRECISION_BITS;
    loop {
        let (lo, hi) = m.pow_bounds(p, bits);
        if lo.is_positive() && hi <= &two * &lo {
            return hi.recip();
        }
        bits *= 2;
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Witness {
    pub config: WitnessConfig,
    pub space: DiscreteMeasureSpace,
    pub tables: Tables,
    pub violations: Vec<ViolationEntry>,
}

impl Witness {
    pub fn verify(&self, op: &dyn Operation) -> Result<WitnessReport, WitnessError> {
        verify_witness(
            op,
            &self.space.weights(),
            &self.tables,
            &self.config.p,
            self.config.mode,
            self.config.threshold.clone(),
        )
    }
}

/// Find `v^0 .. v^(N-1)` and assemble the measure space and atom tables.
pub fn build_witness(op: &dyn Operation, cfg: &WitnessConfig) -> Result<Witness, WitnessError> {
    check_exponent(&cfg.p)?;
    let found: Vec<Result<ViolationEntry, WitnessError>> = (0..cfg.atoms)
        .into_par_iter()
        .map(|n| find_violation(op, n, cfg))
        .collect();
    let violations = found.into_iter().collect::<Result<Vec<_>, _>>()?;
    let weights: Vec<Rational> = violations
        .iter()
        .map(|e| atom_weight(&e.value, &cfg.p))
        .collect();
    let tables = op
        .variables()
        .iter()
        .map(|i| {
            let col = violations
                .iter()
                .map(|e| e.point.get(&i).cloned().unwrap_or_default())
                .collect();
            (i, col)
        })
        .collect();
    Ok(Witness {
        config: cfg.clone(),
        space: DiscreteMeasureSpace::from_weights(&weights),
        tables,
        violations,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Diverges,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Diverges => "DIVERGES",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Partial sum of `sum_n |f_i|^p mu(A_n)` for one coordinate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SourceSum {
    pub var: VarIndex,
    pub sum: Rational,
    /// Contribution of atoms `n <= i`.
    pub prefix: Rational,
    /// `prefix + sum_{i<n<N} 2^-n`.
    pub bound: Rational,
    pub within_bound: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WitnessReport {
    pub atoms: usize,
    /// `sum_n |tau(v^n)|^p mu(A_n)`; a lower bound unless `exact`.
    pub image_sum: Rational,
    pub exact: bool,
    pub threshold: Rational,
    pub sources: Vec<SourceSum>,
    pub total_mass: Rational,
    /// Atoms whose weight differs from `1/|tau(v^n)|^p` (exact `p` only).
    pub weight_mismatches: Vec<usize>,
    pub verdict: Verdict,
}

impl fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "atoms={} image_sum={} exact={} threshold={}",
            self.atoms, self.image_sum, self.exact, self.threshold
        )?;
        for s in &self.sources {
            writeln!(
                f,
                "source x{} sum={} prefix={} bound={} ok={}",
                s.var, s.sum, s.prefix, s.bound, s.within_bound
            )?;
        }
        writeln!(f, "total_mass={}", self.total_mass)?;
        if !self.weight_mismatches.is_empty() {
            let list: Vec<String> = self
                .weight_mismatches
                .iter()
                .map(|n| n.to_string())
                .collect();
            writeln!(f, "weight_mismatch atoms={}", list.join(","))?;
        }
        write!(f, "verdict={}", self.verdict)
    }
}

/// Recompute the image and source partial sums exactly.
///
/// The verdict is `DIVERGES` when the image sum reaches the threshold while
/// every source sum stays within its bound (and, in finite mode, the total
/// mass is at most 1).
pub fn verify_witness(
    op: &dyn Operation,
    weights: &[Rational],
    tables: &Tables,
    p: &Rational,
    mode: Mode,
    threshold: Option<Rational>,
) -> Result<WitnessReport, WitnessError> {
    check_exponent(p)?;
    let atoms = weights.len();
    for (var, col) in tables {
        if col.len() != atoms {
            return Err(WitnessError::ShapeMismatch {
                var: *var,
                got: col.len(),
                expected: atoms,
            });
        }
    }
    let exact = p.is_integer();
    let mut image_sum = Rational::zero();
    let mut weight_mismatches = Vec::new();
    for (n, w) in weights.iter().enumerate() {
        let point: Point = tables.iter().map(|(i, col)| (*i, col[n].clone())).collect();
        let tau = op.apply(&point)?;
        image_sum += &abs_pow_lower(&tau, p) * w;
        if exact && (tau.is_zero() || *w != atom_weight(&tau, p)) {
            weight_mismatches.push(n);
        }
    }
    let sources = tables
        .iter()
        .map(|(i, col)| {
            let terms: Vec<Rational> = col
                .iter()
                .zip(weights)
                .map(|(v, w)| &abs_pow_upper(v, p) * w)
                .collect();
            let sum: Rational = terms.iter().sum();
            let split = (*i as usize + 1).min(atoms);
            let prefix: Rational = terms[..split].iter().sum();
            let tail: Rational = (split..atoms).map(|n| Rational::pow2(-(n as i64))).sum();
            let bound = &prefix + &tail;
            SourceSum {
                var: *i,
                within_bound: sum <= bound,
                sum,
                prefix,
                bound,
            }
        })
        .collect::<Vec<_>>();
    let total_mass: Rational = weights.iter().sum();
    let threshold = threshold.unwrap_or_else(|| {
        let n = Rational::from(atoms);
        if exact {
            n
        } else {
            n / Rational::from(2)
        }
    });
    let diverges = atoms > 0
        && image_sum >= threshold
        && sources.iter().all(|s| s.within_bound)
        && (mode == Mode::Arbitrary || total_mass <= Rational::one());
    Ok(WitnessReport {
        atoms,
        image_sum,
        exact,
        threshold,
        sources,
        total_mass,
        weight_mismatches,
        verdict: if diverges {
            Verdict::Diverges
        } else {
            Verdict::Inconclusive
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::point;
    use crate::term::{parse, Signature, Term};

    fn sq() -> Term {
        parse("sq(x0)", Signature::Extended).unwrap()
    }

    fn cfg(p: i64, mode: Mode, atoms: usize) -> WitnessConfig {
        WitnessConfig::new(p.into(), mode, atoms).unwrap()
    }

    #[test]
    fn square_violations() {
        let c = cfg(1, Mode::Arbitrary, 0);
        let e = find_violation(&sq(), 3, &c).unwrap();
        assert!(e.value > violation_target(3, &e.point, &c.p, c.mode));
        let nine = point([(0, 9)]);
        assert!(Rational::from(81) > violation_target(3, &nine, &c.p, c.mode));
        let e0 = find_violation(&sq(), 0, &c).unwrap();
        assert_eq!(e0.value, Rational::one());
    }

    #[test]
    fn projection_has_no_violation_past_its_index() {
        let c = cfg(1, Mode::Arbitrary, 0);
        for n in 1..6 {
            assert!(matches!(
                find_violation(&Term::proj(0), n, &c),
                Err(WitnessError::NotFound { .. })
            ));
        }
    }

    #[test]
    fn weights_are_reciprocal_powers() {
        assert_eq!(
            atom_weight(&Rational::from(9), &Rational::one()),
            Rational::new(1, 9)
        );
        assert_eq!(
            atom_weight(&Rational::from(-3), &Rational::from(2)),
            Rational::new(1, 9)
        );
        let w = atom_weight(&Rational::from(2), &Rational::new(3, 2));
        // 2^(3/2) is irrational: w <= 2^(-3/2) and w 2^(3/2) >= 1/2
        assert!(&(&w * &w) * &Rational::from(8) <= Rational::one());
        assert!(&(&w * &w) * &Rational::from(8) >= Rational::new(1, 4));
    }

    #[test]
    fn square_witness_diverges() {
        let op = sq();
        let w = build_witness(&op, &cfg(1, Mode::Arbitrary, 100)).unwrap();
        let mut c = w.config.clone();
        c.threshold = Some(50.into());
        let r = verify_witness(
            &op,
            &w.space.weights(),
            &w.tables,
            &c.p,
            c.mode,
            c.threshold,
        )
        .unwrap();
        assert_eq!(r.image_sum, Rational::from(100));
        assert_eq!(r.verdict, Verdict::Diverges);
        assert!(r.sources[0].within_bound);
        assert!(r.sources[0].bound <= &r.sources[0].prefix + &Rational::from(2));
    }

    #[test]
    fn constant_one_in_arbitrary_mode() {
        let w = build_witness(&Term::One, &cfg(1, Mode::Arbitrary, 5)).unwrap();
        assert_eq!(w.space.total_mass(), Rational::from(5));
        assert!(w.tables.is_empty());
    }

    #[test]
    fn finite_mode_keeps_mass_below_one() {
        let op = sq();
        let w = build_witness(&op, &cfg(2, Mode::Finite, 40)).unwrap();
        let r = w.verify(&op).unwrap();
        assert!(r.total_mass < Rational::one());
        assert_eq!(r.verdict, Verdict::Diverges);
    }

    #[test]
    fn empty_witness_is_inconclusive() {
        let op = sq();
        let w = build_witness(&op, &cfg(1, Mode::Arbitrary, 0)).unwrap();
        let r = w.verify(&op).unwrap();
        assert_eq!(r.image_sum, Rational::zero());
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn rejects_small_exponents() {
        assert!(WitnessConfig::new(Rational::new(1, 2), Mode::Arbitrary, 1).is_err());
    }
}
