//! Deterministic probe search for points where an operation outgrows a
//! bound.
//!
//! Probe order: first the coordinate rays (other coordinates 0) `+t e_i`, `-t e_i` for every
//! variable (ascending) on the ladder `t = base^s`, `s = 0, 1, ...`, using
//! half the budget; then seeded random rational directions scaled along the
//! same ladder with the rest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::Rational;
use crate::eval::{EvalError, Operation, Point};
use crate::term::VarIndex;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SearchConfig {
    /// Random directions tried per ladder level.
    pub directions: usize,
    /// Ratio of the geometric magnitude ladder; must exceed 1.
    pub base: Rational,
    /// Total number of probes before giving up.
    pub budget: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            directions: 4,
            base: Rational::from(2),
            budget: 10_000,
            seed: 0,
        }
    }
}

/// A probe that met the target.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Hit {
    pub point: Point,
    pub value: Rational,
    /// 1-based position of this probe in the probe order.
    pub probes: usize,
}

/// Largest numerator and denominator of random direction coordinates.
const DIRECTION_GRID: i64 = 8;

/// Visit probes in order until `accept(point, value)` holds or the budget
/// is spent. `stream` selects an independent random stream for the same
/// seed. Probes whose value is irrational are skipped but counted.
pub fn search(
    op: &dyn Operation,
    accept: impl Fn(&Point, &Rational) -> bool,
    cfg: &SearchConfig,
    stream: u64,
) -> Result<Option<Hit>, EvalError> {
    assert!(cfg.base > Rational::one(), "ladder base must exceed 1");
    let vars: Vec<VarIndex> = op.variables().iter().collect();
    let mut probes = 0usize;
    let mut try_point = |point: Point| -> Result<Option<Hit>, EvalError> {
        probes += 1;
        match op.apply(&point) {
            Ok(value) if accept(&point, &value) => Ok(Some(Hit {
                point,
                value,
                probes,
            })),
            Ok(_) | Err(EvalError::IrrationalValue { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };

    if vars.is_empty() {
        if cfg.budget == 0 {
            return Ok(None);
        }
        return try_point(Point::new());
    }

    let ray_budget = cfg.budget.div_ceil(2);
    let mut used = 0usize;
    let mut t = Rational::one();
    'rays: loop {
        for i in &vars {
            for sign in [1i64, -1] {
                if used == ray_budget {
                    break 'rays;
                }
                used += 1;
                let mut p: Point = vars.iter().map(|j| (*j, Rational::zero())).collect();
                p.insert(*i, &t * &Rational::from(sign));
                if let Some(hit) = try_point(p)? {
                    return Ok(Some(hit));
                }
            }
        }
        t = &t * &cfg.base;
    }

    if cfg.directions == 0 {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut t = Rational::one();
    while used < cfg.budget {
        for _ in 0..cfg.directions {
            if used == cfg.budget {
                break;
            }
            used += 1;
            let p = random_direction(&mut rng, &vars)
                .into_iter()
                .map(|(i, d)| (i, &d * &t))
                .collect();
            if let Some(hit) = try_point(p)? {
                return Ok(Some(hit));
            }
        }
        t = &t * &cfg.base;
    }
    Ok(None)
}

fn random_direction(rng: &mut ChaCha8Rng, vars: &[VarIndex]) -> Vec<(VarIndex, Rational)> {
    loop {
        let d: Vec<(VarIndex, Rational)> = vars
            .iter()
            .map(|i| {
                let num = rng.random_range(-DIRECTION_GRID..=DIRECTION_GRID);
                let den = rng.random_range(1..=DIRECTION_GRID);
                (*i, Rational::new(num, den))
            })
            .collect();
        if d.iter().any(|(_, v)| !v.is_zero()) {
            return d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::FnOperation;

    #[test]
    fn rays_come_first_and_order_is_stable() {
        let op = FnOperation::new([0, 1], |x| Ok(x[&1].clone()));
        let cfg = SearchConfig::default();
        let hit = search(&op, |_, v| *v > 3, &cfg, 0).unwrap().unwrap();
        // level 0: +e0, -e0, +e1, -e1; level 1: ...; level 2 reaches 4 on +e1
        assert_eq!(hit.value, Rational::from(4));
        assert_eq!(hit.probes, 11);
    }

    #[test]
    fn random_phase_finds_mixed_targets() {
        // positive only when both coordinates are nonzero with equal signs
        let op = FnOperation::new([0, 1], |x| Ok((&x[&0] * &x[&1]).max(Rational::zero())));
        let cfg = SearchConfig {
            budget: 200,
            seed: 7,
            ..SearchConfig::default()
        };
        let a = search(&op, |_, v| v.is_positive(), &cfg, 3)
            .unwrap()
            .unwrap();
        let b = search(&op, |_, v| v.is_positive(), &cfg, 3)
            .unwrap()
            .unwrap();
        assert_eq!(a, b);
        assert!(a.probes > 100);
    }

    #[test]
    fn budget_is_respected() {
        let op = FnOperation::new([0], |x| Ok(x[&0].clone()));
        let cfg = SearchConfig {
            budget: 50,
            ..SearchConfig::default()
        };
        assert_eq!(search(&op, |_, _| false, &cfg, 0).unwrap(), None);
    }
}
