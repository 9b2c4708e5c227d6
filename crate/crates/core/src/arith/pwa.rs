//! One-parameter piecewise-affine functions on `[0, +inf)`.
//!
//! These are the normal form for sequences `n -> f_n(x)` at a fixed point `x`:
//! every schema the term language admits induces one, and suprema over the
//! naturals of `min(f(n), cap)` have a closed form on them.

use std::fmt;

use thiserror::Error;

use super::Rational;

/// `t -> slope * t + intercept`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Affine {
    pub slope: Rational,
    pub intercept: Rational,
}

impl Affine {
    pub fn new(slope: Rational, intercept: Rational) -> Self {
        Affine { slope, intercept }
    }

    pub fn at(&self, t: &Rational) -> Rational {
        &(&self.slope * t) + &self.intercept
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PwaError {
    #[error("expected {expected} pieces for {breakpoints} breakpoints, got {got}")]
    PieceCount {
        breakpoints: usize,
        expected: usize,
        got: usize,
    },
    #[error("breakpoints must be strictly increasing and positive")]
    BadBreakpoints,
}

/// Piece `i` governs `[t_i, t_{i+1})` where `t_0 = 0` and the last piece runs
/// to infinity. Adjacent equal pieces are merged, so the representation of a
/// function is canonical.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PiecewiseAffine {
    breakpoints: Vec<Rational>,
    pieces: Vec<Affine>,
    continuous: bool,
}

/// Closed form of `sup_{n in N} min(a*n + b, c)`.
pub fn sup_affine_capped(a: &Rational, b: &Rational, c: &Rational) -> Rational {
    if a.is_positive() {
        c.clone()
    } else {
        b.clone().min(c.clone())
    }
}

/// Closed form of `sup_{n in N} min(f(n), cap)`.
pub fn pwa_sup_capped(f: &PiecewiseAffine, cap: &Rational) -> Rational {
    f.sup_capped(cap)
}

impl PiecewiseAffine {
    pub fn new(breakpoints: Vec<Rational>, pieces: Vec<Affine>) -> Result<Self, PwaError> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(PwaError::PieceCount {
                breakpoints: breakpoints.len(),
                expected: breakpoints.len() + 1,
                got: pieces.len(),
            });
        }
        let increasing = breakpoints.windows(2).all(|w| w[0] < w[1]);
        if !increasing || breakpoints.first().is_some_and(|t| !t.is_positive()) {
            return Err(PwaError::BadBreakpoints);
        }
        Ok(Self::normalized(breakpoints, pieces))
    }

    pub fn affine(slope: Rational, intercept: Rational) -> Self {
        PiecewiseAffine {
            breakpoints: Vec::new(),
            pieces: vec![Affine::new(slope, intercept)],
            continuous: true,
        }
    }

    pub fn constant(c: Rational) -> Self {
        Self::affine(Rational::zero(), c)
    }

    /// Step function taking `values[k]` on `[k, k+1)` and the last value
    /// from then on.
    pub fn steps(values: &[Rational]) -> Self {
        assert!(!values.is_empty(), "step function needs at least one value");
        let breakpoints = (1..values.len()).map(Rational::from).collect();
        let pieces = values
            .iter()
            .map(|v| Affine::new(Rational::zero(), v.clone()))
            .collect();
        Self::normalized(breakpoints, pieces)
    }

    fn normalized(breakpoints: Vec<Rational>, pieces: Vec<Affine>) -> Self {
        let mut bps: Vec<Rational> = Vec::with_capacity(breakpoints.len());
        let mut out: Vec<Affine> = Vec::with_capacity(pieces.len());
        let mut iter = pieces.into_iter();
        out.push(iter.next().expect("at least one piece"));
        for (t, piece) in breakpoints.into_iter().zip(iter) {
            if out.last() == Some(&piece) {
                continue;
            }
            bps.push(t);
            out.push(piece);
        }
        let continuous = bps
            .iter()
            .enumerate()
            .all(|(i, t)| out[i].at(t) == out[i + 1].at(t));
        PiecewiseAffine {
            breakpoints: bps,
            pieces: out,
            continuous,
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Affine] {
        &self.pieces
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    fn piece_index(&self, t: &Rational) -> usize {
        self.breakpoints.partition_point(|b| b <= t)
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.pieces[self.piece_index(t)].at(t)
    }

    /// Segment `i` as `(start, end)`; `end` is `None` for the final segment.
    fn segment(&self, i: usize) -> (Rational, Option<Rational>) {
        let start = if i == 0 {
            Rational::zero()
        } else {
            self.breakpoints[i - 1].clone()
        };
        (start, self.breakpoints.get(i).cloned())
    }

    pub fn sup_capped(&self, cap: &Rational) -> Rational {
        let mut best: Option<Rational> = None;
        let mut offer = |v: Rational| {
            let v = v.min(cap.clone());
            best = Some(match best.take() {
                Some(b) => b.max(v),
                None => v,
            });
        };
        for (i, piece) in self.pieces.iter().enumerate() {
            let (start, end) = self.segment(i);
            let first = Rational::from(start.ceil());
            match end {
                Some(end) => {
                    // largest integer strictly below `end`
                    let last = if end.is_integer() {
                        end - Rational::one()
                    } else {
                        Rational::from(end.floor())
                    };
                    if first <= last {
                        offer(piece.at(&first));
                        offer(piece.at(&last));
                    }
                }
                None => {
                    if piece.slope.is_positive() {
                        return cap.clone();
                    }
                    offer(piece.at(&first));
                }
            }
        }
        best.expect("segment [0, t1) always contains n = 0")
    }

    /// Merge with `other` on a common refinement, combining each pair of
    /// pieces into one or two new pieces.
    fn merge_with(
        &self,
        other: &PiecewiseAffine,
        combine: impl Fn(&Affine, &Affine, &Rational, Option<&Rational>) -> Vec<(Rational, Affine)>,
    ) -> PiecewiseAffine {
        let mut cuts: Vec<Rational> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .cloned()
            .collect();
        cuts.sort();
        cuts.dedup();
        let mut breakpoints = Vec::new();
        let mut pieces = Vec::new();
        for i in 0..=cuts.len() {
            let start = if i == 0 {
                Rational::zero()
            } else {
                cuts[i - 1].clone()
            };
            let end = cuts.get(i);
            let a = &self.pieces[self.piece_index(&start)];
            let b = &other.pieces[other.piece_index(&start)];
            for (k, (t, piece)) in combine(a, b, &start, end).into_iter().enumerate() {
                if i > 0 || k > 0 {
                    breakpoints.push(t);
                }
                pieces.push(piece);
            }
        }
        Self::normalized(breakpoints, pieces)
    }

    fn extremum(&self, other: &PiecewiseAffine, take_max: bool) -> PiecewiseAffine {
        self.merge_with(other, |a, b, start, end| {
            let pick = |t: &Rational| {
                let (va, vb) = (a.at(t), b.at(t));
                if (va >= vb) == take_max {
                    a.clone()
                } else {
                    b.clone()
                }
            };
            let ds = &a.slope - &b.slope;
            if ds.is_zero() {
                return vec![(start.clone(), pick(start))];
            }
            let cross = (&b.intercept - &a.intercept) / ds;
            let inside = &cross > start && end.is_none_or(|e| &cross < e);
            if !inside {
                return vec![(start.clone(), pick(start))];
            }
            // just right of the crossing the slopes decide
            let first = pick(start);
            let second = if first == *a { b.clone() } else { a.clone() };
            vec![(start.clone(), first), (cross, second)]
        })
    }

    pub fn max(&self, other: &PiecewiseAffine) -> PiecewiseAffine {
        self.extremum(other, true)
    }

    pub fn min(&self, other: &PiecewiseAffine) -> PiecewiseAffine {
        self.extremum(other, false)
    }

    pub fn min_const(&self, c: &Rational) -> PiecewiseAffine {
        self.min(&Self::constant(c.clone()))
    }

    pub fn max_const(&self, c: &Rational) -> PiecewiseAffine {
        self.max(&Self::constant(c.clone()))
    }

    pub fn add(&self, other: &PiecewiseAffine) -> PiecewiseAffine {
        self.merge_with(other, |a, b, start, _| {
            vec![(
                start.clone(),
                Affine::new(&a.slope + &b.slope, &a.intercept + &b.intercept),
            )]
        })
    }

    pub fn add_const(&self, c: &Rational) -> PiecewiseAffine {
        self.add(&Self::constant(c.clone()))
    }

    pub fn scale(&self, c: &Rational) -> PiecewiseAffine {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Affine::new(c * &p.slope, c * &p.intercept))
            .collect();
        Self::normalized(self.breakpoints.clone(), pieces)
    }

    pub fn neg(&self) -> PiecewiseAffine {
        self.scale(&Rational::from(-1))
    }

    /// `t -> f(t + k)`.
    pub fn shift(&self, k: u64) -> PiecewiseAffine {
        let k = Rational::from(k);
        let start = self.piece_index(&k);
        let recenter = |p: &Affine| Affine::new(p.slope.clone(), p.at(&k));
        let breakpoints = self.breakpoints[start..].iter().map(|t| t - &k).collect();
        let pieces = self.pieces[start..].iter().map(recenter).collect();
        Self::normalized(breakpoints, pieces)
    }
}

impl fmt::Display for PiecewiseAffine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pieces.iter().enumerate() {
            let (s, e) = self.segment(i);
            if i > 0 {
                write!(f, "; ")?;
            }
            match e {
                Some(e) => write!(f, "[{s},{e}): {}*t + {}", p.slope, p.intercept)?,
                None => write!(f, "[{s},inf): {}*t + {}", p.slope, p.intercept)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    fn brute(f: impl Fn(&Rational) -> Rational, cap: &Rational, upto: i64) -> Rational {
        (0..=upto).map(|n| f(&r(n)).min(cap.clone())).max().unwrap()
    }

    #[test]
    fn affine_examples() {
        assert_eq!(sup_affine_capped(&r(1), &r(0), &r(5)), r(5));
        assert_eq!(sup_affine_capped(&r(0), &r(2), &r(5)), r(2));
        assert_eq!(sup_affine_capped(&r(-1), &r(2), &r(5)), r(2));
        assert_eq!(brute(|n| -n.clone() + r(2), &r(5), 1_000_000), r(2));
    }

    #[test]
    fn pwa_examples() {
        let f = PiecewiseAffine::affine(r(2), r(0));
        assert_eq!(pwa_sup_capped(&f, &r(7)), r(7));

        let tent = PiecewiseAffine::new(
            vec![r(3)],
            vec![Affine::new(r(1), r(0)), Affine::new(r(-1), r(6))],
        )
        .unwrap();
        assert!(tent.is_continuous());
        assert_eq!(pwa_sup_capped(&tent, &r(10)), r(3));
        assert_eq!(brute(|n| tent.eval(n), &r(10), 1_000_000), r(3));

        assert_eq!(
            pwa_sup_capped(&PiecewiseAffine::constant(r(4)), &r(4)),
            r(4)
        );
    }

    #[test]
    fn fractional_breakpoints_use_inward_integers() {
        // peak at t = 5/2 is never an integer
        let f = PiecewiseAffine::new(
            vec![Rational::new(5, 2)],
            vec![Affine::new(r(2), r(0)), Affine::new(r(-2), r(10))],
        )
        .unwrap();
        assert_eq!(f.sup_capped(&r(100)), r(4));
        assert_eq!(brute(|n| f.eval(n), &r(100), 100), r(4));
    }

    #[test]
    fn discontinuous_steps() {
        let f = PiecewiseAffine::steps(&[r(1), r(5), r(2)]);
        assert!(!f.is_continuous());
        assert_eq!(f.eval(&r(1)), r(5));
        assert_eq!(f.eval(&r(9)), r(2));
        assert_eq!(f.sup_capped(&r(9)), r(5));
        assert_eq!(f.sup_capped(&r(3)), r(3));
    }

    #[test]
    fn min_max_add_shift_agree_pointwise() {
        let f = PiecewiseAffine::new(
            vec![r(2), r(7)],
            vec![
                Affine::new(r(3), r(-1)),
                Affine::new(r(0), r(5)),
                Affine::new(Rational::new(-1, 2), Rational::new(17, 2)),
            ],
        )
        .unwrap();
        let g = PiecewiseAffine::affine(Rational::new(1, 3), r(1));
        let mn = f.min(&g);
        let mx = f.max(&g);
        let sum = f.add(&g);
        let sh = f.shift(3);
        for i in 0..200 {
            let t = Rational::new(i, 7);
            assert_eq!(mn.eval(&t), f.eval(&t).min(g.eval(&t)), "min at {t}");
            assert_eq!(mx.eval(&t), f.eval(&t).max(g.eval(&t)), "max at {t}");
            assert_eq!(sum.eval(&t), f.eval(&t) + g.eval(&t));
            assert_eq!(sh.eval(&t), f.eval(&(t.clone() + r(3))));
        }
        assert!(mn.is_continuous() && mx.is_continuous());
    }

    #[test]
    fn rejects_malformed() {
        assert!(PiecewiseAffine::new(vec![r(0)], vec![Affine::new(r(0), r(0)); 2]).is_err());
        assert!(PiecewiseAffine::new(vec![r(2), r(1)], vec![Affine::new(r(0), r(0)); 3]).is_err());
        assert!(PiecewiseAffine::new(vec![r(1)], vec![Affine::new(r(0), r(0))]).is_err());
    }
}
