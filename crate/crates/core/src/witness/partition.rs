//! Disjoint atom sets of prescribed measure in two dyadic atom models.
//!
//! The unbounded model has atoms `(n, z)` for `n >= 0` and integer `z`, with
//! weight `2^z`. The finite model has atoms `(n, m)` for `m >= n`, with
//! weight `2^-m`; its total mass is 4.

use thiserror::Error;

use crate::arith::{trailing_twos, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("weight a_{index} = {value} has no finite binary expansion")]
    NonDyadicWeight { index: usize, value: Rational },
    #[error("weight a_{index} = {value} is negative")]
    NegativeWeight { index: usize, value: Rational },
    #[error("weight a_{index} = {value} exceeds the row bound {bound}")]
    WeightTooLarge {
        index: usize,
        value: Rational,
        bound: Rational,
    },
}

/// Atoms assigned to one requested weight.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AtomSet {
    pub index: usize,
    /// Second coordinates of the atoms `(index, k)`, descending by weight.
    pub exponents: Vec<i64>,
    /// In the finite model, all atoms `(index, m)` with `m >= tail_from` are
    /// also included.
    pub tail_from: Option<i64>,
    pub total: Rational,
}

/// Exponents `z` of the binary expansion `a = sum 2^z`, descending.
fn binary_exponents(index: usize, a: &Rational) -> Result<Vec<i64>, PartitionError> {
    if a.is_negative() {
        return Err(PartitionError::NegativeWeight {
            index,
            value: a.clone(),
        });
    }
    if !a.is_dyadic() {
        return Err(PartitionError::NonDyadicWeight {
            index,
            value: a.clone(),
        });
    }
    let shift = trailing_twos(a.denom()) as i64;
    let num = a.numer().magnitude().clone();
    let bits = num.bits();
    let mut out = Vec::new();
    for b in (0..bits).rev() {
        if num.bit(b) {
            out.push(b as i64 - shift);
        }
    }
    Ok(out)
}

/// Split each `a_n` into atoms `(n, z)` of weight `2^z` of the unbounded
/// model, one set per `n`. Sets are disjoint since their first coordinates
/// differ.
pub fn partitionable_atoms(a: &[Rational]) -> Result<Vec<AtomSet>, PartitionError> {
    a.iter()
        .enumerate()
        .map(|(index, v)| {
            Ok(AtomSet {
                index,
                exponents: binary_exponents(index, v)?,
                tail_from: None,
                total: v.clone(),
            })
        })
        .collect()
}

/// Weight of atom `(n, z)` in the unbounded model.
pub fn unbounded_atom_weight(z: i64) -> Rational {
    Rational::pow2(z)
}

/// Weight of atom `(n, m)` in the finite model, optionally normalized to a
/// probability.
pub fn finite_atom_weight(m: i64, normalized: bool) -> Rational {
    let w = Rational::pow2(-m);
    if normalized {
        w / Rational::from(4)
    } else {
        w
    }
}

/// Mass of row `n` of the finite model: `sum_{m >= n} 2^-m = 2^(1-n)`.
pub fn finite_row_mass(n: i64) -> Rational {
    Rational::pow2(1 - n)
}

/// Un-normalized mass of rows `0..rows` of the finite model.
pub fn finite_model_mass(rows: usize) -> Rational {
    (0..rows as i64).map(finite_row_mass).sum()
}

/// Split each `a_n` into atoms `(n, m)`, `m >= n`, of the finite model.
///
/// Un-normalized, `a_n <= 2^(1-n)` is required, with equality realized by
/// the whole row. With `normalized`, weights are read against the
/// probability `nu / 4` and the bound becomes `2^-(n+1)`.
pub fn conditionally_partitionable_atoms(
    a: &[Rational],
    normalized: bool,
) -> Result<Vec<AtomSet>, PartitionError> {
    let four = Rational::from(4);
    a.iter()
        .enumerate()
        .map(|(index, v)| {
            let n = index as i64;
            let raw = if normalized { v * &four } else { v.clone() };
            let row = finite_row_mass(n);
            if raw > row {
                let bound = if normalized { &row / &four } else { row };
                return Err(PartitionError::WeightTooLarge {
                    index,
                    value: v.clone(),
                    bound,
                });
            }
            let (exponents, tail_from) = if raw == row {
                (Vec::new(), Some(n))
            } else {
                let zs = binary_exponents(index, &raw)?;
                // raw < 2^(1-n) puts every bit at 2^-m with m >= n
                (zs.into_iter().map(|z| -z).collect(), None)
            };
            Ok(AtomSet {
                index,
                exponents,
                tail_from,
                total: v.clone(),
            })
        })
        .collect()
}

/// Exact mass of an atom set of the finite model.
pub fn finite_set_mass(set: &AtomSet, normalized: bool) -> Rational {
    let mut total: Rational = set
        .exponents
        .iter()
        .map(|m| finite_atom_weight(*m, normalized))
        .sum();
    if let Some(m) = set.tail_from {
        let row = finite_row_mass(m);
        total += if normalized {
            row / Rational::from(4)
        } else {
            row
        };
    }
    total
}

/// Exact mass of an atom set of the unbounded model.
pub fn unbounded_set_mass(set: &AtomSet) -> Rational {
    set.exponents
        .iter()
        .map(|z| unbounded_atom_weight(*z))
        .sum()
}
