//! The identity catalog and its randomized checker.
//!
//! Every identity is universally quantified over carrier elements. A side
//! condition `f >= 0` is met by drawing `g` and substituting `|g|`. Each
//! identity also has one documented mutation that must be refutable.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ops::{abs, add, join, le, meet, negpart, pos, sub, trunc};
use super::{truncsup_family, Element, Family, Model, ModelError};
use crate::arith::{PiecewiseAffine, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityId {
    Ts1,
    Ts2,
    Ts3,
    T1,
    T2,
    T3,
    T4P,
    T5P,
    W1,
    W2,
    Distrib,
    SumDistrib,
    TruncSub,
    TruncMono,
    MeetUnit,
    DoubleSup,
}

impl IdentityId {
    pub const ALL: [IdentityId; 16] = [
        IdentityId::Ts1,
        IdentityId::Ts2,
        IdentityId::Ts3,
        IdentityId::T1,
        IdentityId::T2,
        IdentityId::T3,
        IdentityId::T4P,
        IdentityId::T5P,
        IdentityId::W1,
        IdentityId::W2,
        IdentityId::Distrib,
        IdentityId::SumDistrib,
        IdentityId::TruncSub,
        IdentityId::TruncMono,
        IdentityId::MeetUnit,
        IdentityId::DoubleSup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::Ts1 => "TS1",
            IdentityId::Ts2 => "TS2",
            IdentityId::Ts3 => "TS3",
            IdentityId::T1 => "T1",
            IdentityId::T2 => "T2",
            IdentityId::T3 => "T3",
            IdentityId::T4P => "T4P",
            IdentityId::T5P => "T5P",
            IdentityId::W1 => "W1",
            IdentityId::W2 => "W2",
            IdentityId::Distrib => "DISTRIB",
            IdentityId::SumDistrib => "SUMDISTRIB",
            IdentityId::TruncSub => "TRUNCSUB",
            IdentityId::TruncMono => "TRUNCMONO",
            IdentityId::MeetUnit => "MEETUNIT",
            IdentityId::DoubleSup => "DOUBLESUP",
        }
    }

    /// The law as checked. `tsup[g] f_n` is the truncated sup with cap `g`.
    pub fn statement(self) -> &'static str {
        match self {
            IdentityId::Ts1 => "tsup[g] f_n = tsup[g] (f_n /\\ g)",
            IdentityId::Ts2 => "tsup[g] f_n = (f_0 /\\ g) \\/ tsup[g] f_(n+1)",
            IdentityId::Ts3 => "tsup[g] (f_n /\\ h) <= h",
            IdentityId::T1 => "trunc(f) = trunc(f+) - f-",
            IdentityId::T2 => "f >= 0 implies trunc(f) >= 0",
            IdentityId::T3 => "f, g >= 0 implies f /\\ trunc(g) <= trunc(f) <= f",
            IdentityId::T4P => "f+ = tsup[f+] n*trunc(f+)",
            IdentityId::T5P => "f+ = tsup[f+] (n*f+ - trunc(n*f+))",
            IdentityId::W1 => "1 /\\ 0 = 0",
            IdentityId::W2 => "f >= 0 implies f = tsup[f] n*(f /\\ 1)",
            IdentityId::Distrib => "a /\\ sup_i x_i = sup_i (a /\\ x_i)",
            IdentityId::SumDistrib => "h >= 0 implies tsup[g] (f_n + h) = (tsup[g] f_n + h) /\\ g",
            IdentityId::TruncSub => "a, b >= 0 implies trunc(a+b) <= trunc(a) + trunc(b)",
            IdentityId::TruncMono => "0 <= a <= b implies a - trunc(a) <= b - trunc(b)",
            IdentityId::MeetUnit => "u >= 0 implies (a+ /\\ u) - a- = a /\\ u",
            IdentityId::DoubleSup => {
                "f, f_k >= 0 implies f = tsup[f]_i (i*f - tsup[i*f]_k trunc(f_k))"
            }
        }
    }

    /// The one-place syntactic break applied when checking the mutant.
    pub fn mutation(self) -> &'static str {
        match self {
            IdentityId::Ts1 => "inner meet with g replaced by join",
            IdentityId::Ts2 => "f_0 /\\ g term dropped",
            IdentityId::Ts3 => "inner meet with h dropped",
            IdentityId::T1 => "f- added instead of subtracted",
            IdentityId::T2 => "positivity substitution dropped",
            IdentityId::T3 => "trunc on g dropped",
            IdentityId::T4P => "cap f+ replaced by trunc(f+)",
            IdentityId::T5P => "factor n dropped",
            IdentityId::W1 => "right side 0 replaced by 1",
            IdentityId::W2 => "factor n dropped",
            IdentityId::Distrib => "outer meet replaced by join",
            IdentityId::SumDistrib => "final meet with g dropped",
            IdentityId::TruncSub => "inequality reversed",
            IdentityId::TruncMono => "inequality reversed",
            IdentityId::MeetUnit => "a- added instead of subtracted",
            IdentityId::DoubleSup => "factor i dropped",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        let up = s.trim().to_ascii_uppercase();
        IdentityId::ALL
            .into_iter()
            .find(|id| {
                id.name() == up
                    || (up == "T4'" && *id == IdentityId::T4P)
                    || (up == "T5'" && *id == IdentityId::T5P)
            })
            .ok_or_else(|| ModelError::UnknownIdentity(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdentityOutcome {
    Holds {
        samples: usize,
    },
    Fails {
        sample: usize,
        instantiation: String,
    },
}

impl IdentityOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, IdentityOutcome::Holds { .. })
    }
}

/// Result of one catalog check, printable as a single line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    pub id: IdentityId,
    pub model: Model,
    pub mutated: bool,
    pub outcome: IdentityOutcome,
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.mutated { "-mut" } else { "" };
        match &self.outcome {
            IdentityOutcome::Holds { samples } => {
                write!(f, "{}{tag} holds samples={samples}", self.id)
            }
            IdentityOutcome::Fails { instantiation, .. } => {
                write!(f, "{}{tag} FAILS at={instantiation}", self.id)
            }
        }
    }
}

/// Checks `id` (or its mutant) on `samples` instantiations. Sample `i` draws
/// from a ChaCha stream `i` under `seed`, so the reported counterexample is
/// the lowest failing index regardless of scheduling.
pub fn check_identity(
    model: Model,
    id: IdentityId,
    samples: usize,
    seed: u64,
    mutated: bool,
) -> IdentityReport {
    let failure = (0..samples).into_par_iter().find_map_first(|i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut inst = Instance {
            model,
            rng,
            vars: Vec::new(),
        };
        if inst.run(id, mutated) {
            None
        } else {
            Some((i, inst.describe()))
        }
    });
    let outcome = match failure {
        Some((sample, instantiation)) => IdentityOutcome::Fails {
            sample,
            instantiation,
        },
        None => IdentityOutcome::Holds { samples },
    };
    IdentityReport {
        id,
        model,
        mutated,
        outcome,
    }
}

struct Instance {
    model: Model,
    rng: ChaCha8Rng,
    vars: Vec<(String, Element)>,
}

impl Instance {
    fn draw(&mut self, name: &str) -> Element {
        let e = self.model.random_element(&mut self.rng);
        self.vars.push((name.to_string(), e.clone()));
        e
    }

    fn draw_pos(&mut self, name: &str) -> Element {
        let e = abs(&self.model.random_element(&mut self.rng));
        self.vars.push((name.to_string(), e.clone()));
        e
    }

    /// `f_n = n*u + v`, recorded as its two parameters.
    fn draw_family(&mut self) -> (Family, Element) {
        let u = self.draw("u");
        let v = self.draw("v");
        (Family::affine(&u, &v), v)
    }

    /// A list of one to four elements.
    fn draw_list(&mut self, prefix: &str, positive: bool) -> Vec<Element> {
        let len = rand::Rng::random_range(&mut self.rng, 1..=4);
        (0..len)
            .map(|k| {
                let name = format!("{prefix}{k}");
                if positive {
                    self.draw_pos(&name)
                } else {
                    self.draw(&name)
                }
            })
            .collect()
    }

    fn describe(&self) -> String {
        if self.vars.is_empty() {
            return "constants".into();
        }
        self.vars
            .iter()
            .map(|(name, e)| {
                let coords: Vec<String> = e.iter().map(|c| c.to_string()).collect();
                format!("{name}=({})", coords.join(","))
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    fn run(&mut self, id: IdentityId, m: bool) -> bool {
        let model = self.model;
        match id {
            IdentityId::Ts1 => {
                let (fam, _) = self.draw_family();
                let g = self.draw("g");
                let inner = if m {
                    fam.with_elem(&g, PiecewiseAffine::max_const)
                } else {
                    fam.with_elem(&g, PiecewiseAffine::min_const)
                };
                truncsup_family(&g, &fam) == truncsup_family(&g, &inner)
            }
            IdentityId::Ts2 => {
                let (fam, f0) = self.draw_family();
                let g = self.draw("g");
                let tail = truncsup_family(&g, &fam.map(|p| p.shift(1)));
                let rhs = if m { tail } else { join(&meet(&f0, &g), &tail) };
                truncsup_family(&g, &fam) == rhs
            }
            IdentityId::Ts3 => {
                let (fam, _) = self.draw_family();
                let g = self.draw("g");
                let h = self.draw("h");
                let inner = if m {
                    fam
                } else {
                    fam.with_elem(&h, PiecewiseAffine::min_const)
                };
                le(&truncsup_family(&g, &inner), &h)
            }
            IdentityId::T1 => {
                let f = self.draw("f");
                let rhs = if m {
                    add(&trunc(&pos(&f)), &negpart(&f))
                } else {
                    sub(&trunc(&pos(&f)), &negpart(&f))
                };
                trunc(&f) == rhs
            }
            IdentityId::T2 => {
                let f = if m {
                    self.draw("f")
                } else {
                    self.draw_pos("f")
                };
                le(&model.zero(), &trunc(&f))
            }
            IdentityId::T3 => {
                let f = self.draw_pos("f");
                let g = self.draw_pos("g");
                let tg = if m { g } else { trunc(&g) };
                le(&meet(&f, &tg), &trunc(&f)) && le(&trunc(&f), &f)
            }
            IdentityId::T4P => {
                let p = pos(&self.draw("f"));
                let fam = Family::affine(&trunc(&p), &model.zero());
                let cap = if m { trunc(&p) } else { p.clone() };
                p == truncsup_family(&cap, &fam)
            }
            IdentityId::T5P => {
                let p = pos(&self.draw("f"));
                let fam = if m {
                    Family::constant(&sub(&p, &trunc(&p)))
                } else {
                    let np = Family::affine(&p, &model.zero());
                    let one = Rational::one();
                    np.zip(&np.map(|q| q.min_const(&one)), |a, b| a.add(&b.neg()))
                };
                p == truncsup_family(&p, &fam)
            }
            IdentityId::W1 => {
                let rhs = if m { model.unit() } else { model.zero() };
                meet(&model.unit(), &model.zero()) == rhs
            }
            IdentityId::W2 => {
                let f = self.draw_pos("f");
                let base = meet(&f, &model.unit());
                let fam = if m {
                    Family::constant(&base)
                } else {
                    Family::affine(&base, &model.zero())
                };
                f == truncsup_family(&f, &fam)
            }
            IdentityId::Distrib => {
                let a = self.draw("a");
                let xs = self.draw_list("x", false);
                let sup = xs[1..].iter().fold(xs[0].clone(), |acc, x| join(&acc, x));
                let lhs = if m { join(&a, &sup) } else { meet(&a, &sup) };
                let rhs = xs[1..]
                    .iter()
                    .fold(meet(&a, &xs[0]), |acc, x| join(&acc, &meet(&a, x)));
                lhs == rhs
            }
            IdentityId::SumDistrib => {
                let (fam, _) = self.draw_family();
                let g = self.draw("g");
                let h = self.draw_pos("h");
                let lhs = truncsup_family(&g, &fam.with_elem(&h, PiecewiseAffine::add_const));
                let shifted = add(&truncsup_family(&g, &fam), &h);
                let rhs = if m { shifted } else { meet(&shifted, &g) };
                lhs == rhs
            }
            IdentityId::TruncSub => {
                let a = self.draw_pos("a");
                let b = self.draw_pos("b");
                let lhs = trunc(&add(&a, &b));
                let rhs = add(&trunc(&a), &trunc(&b));
                if m {
                    le(&rhs, &lhs)
                } else {
                    le(&lhs, &rhs)
                }
            }
            IdentityId::TruncMono => {
                let a = self.draw_pos("a");
                let d = self.draw_pos("d");
                let b = add(&a, &d);
                let lhs = sub(&a, &trunc(&a));
                let rhs = sub(&b, &trunc(&b));
                if m {
                    le(&rhs, &lhs)
                } else {
                    le(&lhs, &rhs)
                }
            }
            IdentityId::MeetUnit => {
                let a = self.draw("a");
                let u = self.draw_pos("u");
                let head = meet(&pos(&a), &u);
                let lhs = if m {
                    add(&head, &negpart(&a))
                } else {
                    sub(&head, &negpart(&a))
                };
                lhs == meet(&a, &u)
            }
            IdentityId::DoubleSup => {
                let f = self.draw_pos("f");
                let fks = self.draw_list("f", true);
                let truncs: Vec<Element> = fks.iter().map(|x| trunc(x)).collect();
                // i -> tsup[i*f]_k trunc(f_k), a finite family so a max of meets
                let if_ = if m {
                    Family::constant(&f)
                } else {
                    Family::affine(&f, &model.zero())
                };
                let inner = truncs[1..].iter().fold(
                    if_.with_elem(&truncs[0], PiecewiseAffine::min_const),
                    |acc, t| {
                        acc.zip(
                            &if_.with_elem(t, PiecewiseAffine::min_const),
                            PiecewiseAffine::max,
                        )
                    },
                );
                let outer = if_.zip(&inner, |a, b| a.add(&b.neg()));
                f == truncsup_family(&f, &outer)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse_back() {
        for id in IdentityId::ALL {
            assert_eq!(id.name().parse::<IdentityId>().unwrap(), id);
        }
        assert_eq!("t4'".parse::<IdentityId>().unwrap(), IdentityId::T4P);
        assert!("T6".parse::<IdentityId>().is_err());
    }

    #[test]
    fn catalog_holds_on_small_samples() {
        for model in [
            Model::Reals,
            Model::power(3).unwrap(),
            Model::quotient(4, 1).unwrap(),
        ] {
            for id in IdentityId::ALL {
                let rep = check_identity(model, id, 200, 5, false);
                assert!(rep.outcome.holds(), "{model}: {rep}");
            }
        }
    }

    #[test]
    fn every_mutation_is_refuted() {
        for id in IdentityId::ALL {
            let rep = check_identity(Model::Reals, id, 2000, 5, true);
            assert!(!rep.outcome.holds(), "{rep}");
        }
    }

    #[test]
    fn counterexample_is_deterministic() {
        let a = check_identity(Model::power(2).unwrap(), IdentityId::Ts3, 500, 9, true);
        let b = check_identity(Model::power(2).unwrap(), IdentityId::Ts3, 500, 9, true);
        assert_eq!(a, b);
        assert!(a.to_string().starts_with("TS3-mut FAILS at=u=("));
    }
}
