//! Line-oriented witness files.
//!
//! ```text
//! p=1 mode=A N=2
//! atom 0 weight 1
//! atom 1 weight 1/9
//! val 0 0 1
//! val 0 1 3
//! ```
//!
//! `val <i> <n> <r>` gives coordinate `i` on atom `n`; absent entries are 0.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Mode, Tables, Witness};
use crate::arith::Rational;
use crate::term::VarIndex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("witness file line {line}: {message}")]
pub struct WitnessFileError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WitnessFile {
    pub p: Rational,
    pub mode: Mode,
    pub weights: Vec<Rational>,
    pub tables: Tables,
}

pub fn write_witness(w: &Witness) -> String {
    let mut out = String::new();
    let n = w.space.atoms.len();
    let _ = writeln!(
        out,
        "p={} mode={} N={n}",
        w.config.p,
        w.config.mode.letter()
    );
    for (k, (_, weight)) in w.space.atoms.iter().enumerate() {
        let _ = writeln!(out, "atom {k} weight {weight}");
    }
    for (i, col) in &w.tables {
        for (k, v) in col.iter().enumerate() {
            let _ = writeln!(out, "val {i} {k} {v}");
        }
    }
    out
}

pub fn read_witness(text: &str) -> Result<WitnessFile, WitnessFileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, message: String| WitnessFileError { line, message };
    let (hline, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing header `p=<r> mode=<A|F> N=<n>`".into()))?;
    let (mut p, mut mode, mut count) = (None, None, None);
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(hline, format!("malformed header field `{field}`")))?;
        match key {
            "p" => {
                p = Some(
                    value
                        .parse::<Rational>()
                        .map_err(|e| err(hline, e.to_string()))?,
                )
            }
            "mode" => {
                mode = Some(match value {
                    "A" => Mode::Arbitrary,
                    "F" => Mode::Finite,
                    _ => return Err(err(hline, format!("unknown mode `{value}`"))),
                })
            }
            "N" => {
                count = Some(
                    value
                        .parse::<usize>()
                        .map_err(|e| err(hline, format!("bad atom count: {e}")))?,
                )
            }
            _ => return Err(err(hline, format!("unknown header field `{key}`"))),
        }
    }
    let (Some(p), Some(mode), Some(count)) = (p, mode, count) else {
        return Err(err(hline, "header needs p, mode and N".into()));
    };
    let mut weights: Vec<Option<Rational>> = vec![None; count];
    let mut cells: std::collections::BTreeMap<VarIndex, Vec<Option<Rational>>> = Default::default();
    for (line, text) in lines {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let atom_index = |s: &str| -> Result<usize, WitnessFileError> {
            let k: usize = s
                .parse()
                .map_err(|_| err(line, format!("bad atom index `{s}`")))?;
            if k >= count {
                return Err(err(
                    line,
                    format!("atom index {k} out of range (N={count})"),
                ));
            }
            Ok(k)
        };
        let value = |s: &str| s.parse::<Rational>().map_err(|e| err(line, e.to_string()));
        match parts.as_slice() {
            ["atom", k, "weight", w] => {
                let k = atom_index(k)?;
                let w = value(w)?;
                if !w.is_positive() {
                    return Err(err(line, format!("atom weight {w} must be positive")));
                }
                if weights[k].replace(w).is_some() {
                    return Err(err(line, format!("atom {k} listed twice")));
                }
            }
            ["val", i, k, v] => {
                let i: VarIndex = i
                    .parse()
                    .map_err(|_| err(line, format!("bad variable index `{i}`")))?;
                let k = atom_index(k)?;
                let col = cells.entry(i).or_insert_with(|| vec![None; count]);
                if col[k].replace(value(v)?).is_some() {
                    return Err(err(line, format!("value of x{i} at atom {k} listed twice")));
                }
            }
            _ => return Err(err(line, format!("unrecognized line `{text}`"))),
        }
    }
    let weights = weights
        .into_iter()
        .enumerate()
        .map(|(k, w)| w.ok_or_else(|| err(0, format!("atom {k} has no weight line"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tables = Tables::new();
    for (i, col) in cells {
        let col = col
            .into_iter()
            .enumerate()
            .map(|(k, v)| v.ok_or_else(|| err(0, format!("x{i} has no value at atom {k}"))))
            .collect::<Result<Vec<_>, _>>()?;
        tables.insert(i, col);
    }
    Ok(WitnessFile {
        p,
        mode,
        weights,
        tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{parse, Signature};
    use crate::witness::{build_witness, WitnessConfig};

    #[test]
    fn round_trip() {
        let op = parse("sq(x0)", Signature::Extended).unwrap();
        let cfg = WitnessConfig::new(1.into(), Mode::Arbitrary, 4).unwrap();
        let w = build_witness(&op, &cfg).unwrap();
        let text = write_witness(&w);
        assert!(text.starts_with("p=1 mode=A N=4\natom 0 weight 1\n"));
        let back = read_witness(&text).unwrap();
        assert_eq!(back.weights, w.space.weights());
        assert_eq!(back.tables, w.tables);
    }

    #[test]
    fn errors_carry_lines() {
        let e = read_witness("p=1 mode=A N=1\n\natom 3 weight 1\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(read_witness("p=1 mode=Q N=1").is_err());
        assert!(read_witness("p=1 mode=A N=1\n").is_err());
    }
}
