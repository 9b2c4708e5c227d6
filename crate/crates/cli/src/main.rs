use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use lpterm_core::certify::{classify, infer_bound, CertifyError};
use lpterm_core::equality::{free_eq, FreeEq};
use lpterm_core::eval::{eval_traced, Point};
use lpterm_core::models::{check_identity, IdentityId, IdentityOutcome, Model};
use lpterm_core::synthesis::{
    indicator_ge, indicator_ge_dual, indicator_gt, indicator_gt_unital, parse_simple_spec,
    simple_term, VerificationGrid,
};
use lpterm_core::term::VarIndex;
use lpterm_core::witness::{
    build_witness, read_witness, verify_witness, write_witness, Mode, Verdict, WitnessConfig,
    WitnessError, WitnessReport,
};
use lpterm_core::{parse, Interval, Rational, Signature, Term};

/// Exact analysis of vector-lattice operations built from truncated sups.
#[derive(Parser, Debug)]
#[command(name = "lpterm", version, propagate_version = true)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Reject randomized commands run without an explicit --seed.
    #[arg(long, global = true)]
    strict: bool,
    /// Signature used to parse terms: t (truncation), u (unit) or ext (adds sq and abspow).
    #[arg(long, global = true, default_value = "t", value_parser = parse_sig)]
    sig: Signature,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    JsonLines,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a term exactly at a rational point.
    ///
    /// Prints the value as a reduced fraction. Warnings about monotone
    /// schemas that did not settle go to stderr.
    Eval {
        #[command(flatten)]
        term: TermSource,
        /// Point such as x0=1/2,x1=3.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        at: Point,
    },
    /// Infer a linear bound |t(x)| <= k + sum_j lambda_j |x_j|.
    ///
    /// A bound with k=0 means the term maps p-integrable functions to
    /// p-integrable functions over every measure space; any k suffices over
    /// finite measure spaces. Exits 1 when the term has a black-box node and
    /// no bound can be inferred.
    Certify {
        #[command(flatten)]
        term: TermSource,
    },
    /// Report which integrability classes the term preserves.
    ///
    /// Prints three flags (every measure space, finite measure spaces,
    /// bounded functions), the inferred bound or certificate=none, and an
    /// exact image enclosure over the first box.
    Classify {
        #[command(flatten)]
        term: TermSource,
        /// Box side such as 0=-3,3; repeat for more variables.
        #[arg(long = "box", value_parser = parse_side, allow_hyphen_values = true)]
        sides: Vec<(VarIndex, Interval)>,
    },
    /// Build a discrete measure space on which the term's image escapes Lp.
    ///
    /// Finds points v^n with |t(v^n)|^p above the growth target, weights atom
    /// n by 1/|t(v^n)|^p and prints the witness file. A failed search is
    /// inconclusive: it does not show the term preserves integrability.
    Witness {
        #[command(flatten)]
        term: TermSource,
        /// Exponent p >= 1.
        #[arg(long, default_value = "1")]
        p: Rational,
        /// A: every measure space; F: finite measure spaces.
        #[arg(long, value_enum, ignore_case = true, default_value_t = ModeArg::A)]
        mode: ModeArg,
        /// Number of atoms.
        #[arg(long, default_value_t = 32)]
        atoms: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Probes per atom before giving up.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Write the witness file here and print the verification report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recheck a witness file exactly against a term.
    ///
    /// Recomputes the image sum and the per-coordinate source sums. Exits 1
    /// when the verdict is INCONCLUSIVE.
    Verify {
        #[arg(long)]
        witness: PathBuf,
        #[command(flatten)]
        term: TermSource,
    },
    /// Synthesize indicator and simple-function terms.
    ///
    /// Prints a term that parses back under the selected signature.
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
    },
    /// Check the identity catalog in a concrete model on random instances.
    ///
    /// Models: r (the reals), power:K (functions on K points) and
    /// quotient:K:N (functions on K points modulo those vanishing off the
    /// last N). Exits 1 when some identity fails.
    Axioms {
        #[arg(long, default_value = "r")]
        model: Model,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Only this identity.
        #[arg(long)]
        id: Option<IdentityId>,
        /// Check the mutated form of each identity instead.
        #[arg(long)]
        mutate: bool,
    },
    /// Decide equality of two terms in the free algebra by sampling.
    ///
    /// Two terms are equal as operations exactly when they agree as
    /// functions; this compares them at seeded random rational points.
    /// Exits 1 on the first differing point.
    FreeEq {
        #[arg(long, allow_hyphen_values = true)]
        left: String,
        #[arg(long, allow_hyphen_values = true)]
        right: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand, Debug)]
enum SynthKind {
    /// Indicator of {x_var > lambda} for lambda > 0.
    IndGt(Threshold),
    /// Indicator of {x_var >= lambda} for lambda > 0.
    IndGe(Threshold),
    /// Indicator of {x_var >= lambda} as one minus a strict indicator.
    IndGeDual(Threshold),
    /// Indicator of {x_var > lambda} for any lambda, using the unit.
    IndGtUnital(Threshold),
    /// Nonnegative simple function below a dominator, from a spec file.
    ///
    /// Lines: `dominator <term>` once and `entry <coefficient> <region>`.
    /// The result is checked on a uniform grid.
    Simple {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "-4", allow_hyphen_values = true)]
        lo: Rational,
        #[arg(long, default_value = "4", allow_hyphen_values = true)]
        hi: Rational,
        /// Grid intervals per axis.
        #[arg(long, default_value_t = 16)]
        steps: usize,
    },
}

#[derive(Args, Debug)]
struct Threshold {
    #[arg(long)]
    var: VarIndex,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Rational,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct TermSource {
    /// Term text.
    #[arg(long, allow_hyphen_values = true)]
    expr: Option<String>,
    /// File holding the term text.
    #[arg(long)]
    term: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    A,
    F,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::A => Mode::Arbitrary,
            ModeArg::F => Mode::Finite,
        }
    }
}

/// Outcome of a command that ran to completion.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
enum Status {
    Ok,
    Verdict,
}

/// Input or usage problem; exit 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

struct Out {
    format: Format,
    buf: Vec<String>,
}

impl Out {
    fn text(&mut self, line: impl Into<String>) {
        if self.format == Format::Text {
            self.buf.push(line.into());
        }
    }

    fn record(&mut self, v: Value) {
        if self.format == Format::JsonLines {
            self.buf.push(v.to_string());
        }
    }
}

fn parse_sig(s: &str) -> Result<Signature, String> {
    s.parse::<Signature>().map_err(|e| e.to_string())
}

fn parse_var(s: &str) -> Result<VarIndex, String> {
    let s = s.trim();
    s.strip_prefix('x')
        .unwrap_or(s)
        .parse()
        .map_err(|_| format!("bad variable `{s}`"))
}

fn parse_point(s: &str) -> Result<Point, String> {
    let mut p = Point::new();
    for part in s.split(',').filter(|t| !t.trim().is_empty()) {
        let (var, val) = part
            .split_once('=')
            .ok_or_else(|| format!("expected x<i>=<rational>, got `{part}`"))?;
        let var = parse_var(var)?;
        let val: Rational = val.parse().map_err(|e| format!("{e}"))?;
        if p.insert(var, val).is_some() {
            return Err(format!("x{var} given twice"));
        }
    }
    Ok(p)
}

fn parse_side(s: &str) -> Result<(VarIndex, Interval), String> {
    let (var, range) = s
        .split_once('=')
        .ok_or_else(|| format!("expected <i>=<lo>,<hi>, got `{s}`"))?;
    let (lo, hi) = range
        .split_once(',')
        .ok_or_else(|| format!("expected <lo>,<hi>, got `{range}`"))?;
    let lo: Rational = lo.parse().map_err(|e| format!("{e}"))?;
    let hi: Rational = hi.parse().map_err(|e| format!("{e}"))?;
    let side = Interval::new(lo, hi).map_err(|e| e.to_string())?;
    Ok((parse_var(var)?, side))
}

fn load_term(src: &TermSource, sig: Signature) -> Result<Term, Usage> {
    let text = match (&src.expr, &src.term) {
        (Some(e), _) => e.clone(),
        (None, Some(path)) => fs::read_to_string(path)
            .map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?,
        (None, None) => return Err(Usage("one of --expr or --term is required".into())),
    };
    Ok(parse(text.trim(), sig)?)
}

fn need_seed(cli: &Cli, seed: Option<u64>) -> Result<u64, Usage> {
    match seed {
        Some(s) => Ok(s),
        None if cli.strict => Err(Usage("--strict requires an explicit --seed".into())),
        None => Ok(0),
    }
}

fn point_json(p: &Point) -> Value {
    let m: Map<String, Value> = p
        .iter()
        .map(|(i, v)| (format!("x{i}"), Value::String(v.to_string())))
        .collect();
    Value::Object(m)
}

fn cert_json(c: &lpterm_core::BoundCertificate) -> Value {
    let lambda: Map<String, Value> = c
        .lambda
        .iter()
        .map(|(i, l)| (i.to_string(), Value::String(l.to_string())))
        .collect();
    json!({ "k": c.k.to_string(), "lambda": lambda })
}

fn report_json(r: &WitnessReport) -> Value {
    let sources: Vec<Value> = r
        .sources
        .iter()
        .map(|s| {
            json!({
                "var": s.var,
                "sum": s.sum.to_string(),
                "prefix": s.prefix.to_string(),
                "bound": s.bound.to_string(),
                "ok": s.within_bound,
            })
        })
        .collect();
    json!({
        "atoms": r.atoms,
        "image_sum": r.image_sum.to_string(),
        "exact": r.exact,
        "threshold": r.threshold.to_string(),
        "sources": sources,
        "total_mass": r.total_mass.to_string(),
        "weight_mismatches": r.weight_mismatches,
        "verdict": r.verdict.to_string(),
    })
}

fn verdict_status(r: &WitnessReport) -> Status {
    match r.verdict {
        Verdict::Diverges => Status::Ok,
        Verdict::Inconclusive => Status::Verdict,
    }
}

fn run(cli: &Cli, out: &mut Out) -> Result<Status, Usage> {
    let sig = cli.sig;
    match &cli.command {
        Command::Eval { term, at } => {
            let t = load_term(term, sig)?;
            let (v, warnings) = eval_traced(&t, at)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            out.text(v.to_string());
            out.record(json!({ "value": v.to_string() }));
            Ok(Status::Ok)
        }
        Command::Certify { term } => {
            let t = load_term(term, sig)?;
            match infer_bound(&t) {
                Ok(c) => {
                    out.text(c.to_string());
                    out.record(cert_json(&c));
                    Ok(Status::Ok)
                }
                Err(e @ CertifyError::NotCertifiable(_)) => {
                    out.text(format!("not certifiable: {e}"));
                    out.record(json!({ "certifiable": false, "reason": e.to_string() }));
                    Ok(Status::Verdict)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Classify { term, sides } => {
            let t = load_term(term, sig)?;
            let boxes = if sides.is_empty() {
                Vec::new()
            } else {
                let mut bx = BTreeMap::new();
                for (i, side) in sides {
                    if bx.insert(*i, side.clone()).is_some() {
                        return Err(Usage(format!("--box gives x{i} twice")));
                    }
                }
                vec![bx]
            };
            let c = classify(&t, &boxes)?;
            out.text(c.to_string());
            let mut rec = json!({
                "signature": c.signature.to_string(),
                "integrability": c.preserves_integrability,
                "finite": c.preserves_finite_measure_integrability,
                "infty": c.preserves_infty_integrability,
                "certificate": c.certificate.as_ref().map(cert_json),
            });
            if let Some((bx, image)) = &c.box_bound_witness {
                let sides: Map<String, Value> = bx
                    .iter()
                    .map(|(i, s)| (format!("x{i}"), Value::String(s.to_string())))
                    .collect();
                rec["box"] = Value::Object(sides);
                rec["image"] = Value::String(image.to_string());
            }
            out.record(rec);
            Ok(Status::Ok)
        }
        Command::Witness {
            term,
            p,
            mode,
            atoms,
            seed,
            budget,
            out: path,
        } => {
            let seed = need_seed(cli, *seed)?;
            let t = load_term(term, sig)?;
            let mut cfg = WitnessConfig::new(p.clone(), (*mode).into(), *atoms)?;
            cfg.search.seed = seed;
            cfg.search.budget = *budget;
            let w = match build_witness(&t, &cfg) {
                Ok(w) => w,
                Err(e @ WitnessError::NotFound { .. }) => {
                    let cert = infer_bound(&t).ok();
                    out.text(format!("inconclusive: {e}"));
                    if let Some(c) = &cert {
                        out.text(format!("term is certified: {c}"));
                    }
                    out.record(json!({
                        "verdict": "INCONCLUSIVE",
                        "reason": e.to_string(),
                        "certificate": cert.as_ref().map(cert_json),
                    }));
                    return Ok(Status::Verdict);
                }
                Err(e) => return Err(e.into()),
            };
            let report = w.verify(&t)?;
            let file = write_witness(&w);
            match path {
                Some(path) => {
                    fs::write(path, &file)
                        .map_err(|e| Usage(format!("cannot write {}: {e}", path.display())))?;
                    out.text(report.to_string());
                }
                None => out.text(file.trim_end()),
            }
            out.record(json!({
                "p": cfg.p.to_string(),
                "mode": cfg.mode.letter().to_string(),
                "atoms": w.violations.len(),
            }));
            for (n, e) in w.violations.iter().enumerate() {
                out.record(json!({
                    "atom": n,
                    "weight": w.space.weights()[n].to_string(),
                    "point": point_json(&e.point),
                    "value": e.value.to_string(),
                }));
            }
            out.record(report_json(&report));
            Ok(verdict_status(&report))
        }
        Command::Verify { witness, term } => {
            let text = fs::read_to_string(witness)
                .map_err(|e| Usage(format!("cannot read {}: {e}", witness.display())))?;
            let file = read_witness(&text)?;
            let t = load_term(term, sig)?;
            let report = verify_witness(&t, &file.weights, &file.tables, &file.p, file.mode, None)?;
            out.text(report.to_string());
            out.record(report_json(&report));
            Ok(verdict_status(&report))
        }
        Command::Synth { kind } => {
            let t = match kind {
                SynthKind::IndGt(th) => indicator_gt(th.var, &th.lambda)?,
                SynthKind::IndGe(th) => indicator_ge(th.var, &th.lambda)?,
                SynthKind::IndGeDual(th) => indicator_ge_dual(th.var, &th.lambda)?,
                SynthKind::IndGtUnital(th) => indicator_gt_unital(th.var, &th.lambda),
                SynthKind::Simple {
                    spec,
                    lo,
                    hi,
                    steps,
                } => {
                    let text = fs::read_to_string(spec)
                        .map_err(|e| Usage(format!("cannot read {}: {e}", spec.display())))?;
                    let spec = parse_simple_spec(&text, sig)?;
                    if lo > hi {
                        return Err(Usage(format!("--lo {lo} exceeds --hi {hi}")));
                    }
                    let mut vars = spec.dominator.free_vars();
                    for (_, region) in &spec.entries {
                        vars = vars.union(&region.variables().into_iter().collect());
                    }
                    let grid =
                        VerificationGrid::uniform(vars.iter(), lo.clone(), hi.clone(), *steps);
                    simple_term(&spec, &grid)?
                }
            };
            let text = t.to_string();
            if let Err(e) = parse(&text, sig) {
                return Err(Usage(format!(
                    "the result does not parse under signature {sig} ({e}); try --sig u"
                )));
            }
            out.text(&text);
            out.record(json!({ "term": text }));
            Ok(Status::Ok)
        }
        Command::Axioms {
            model,
            samples,
            seed,
            id,
            mutate,
        } => {
            let seed = need_seed(cli, *seed)?;
            let ids: Vec<IdentityId> = match id {
                Some(id) => vec![*id],
                None => IdentityId::ALL.to_vec(),
            };
            let mut status = Status::Ok;
            for id in ids {
                let rep = check_identity(*model, id, *samples, seed, *mutate);
                out.text(rep.to_string());
                let rec = match &rep.outcome {
                    IdentityOutcome::Holds { samples } => json!({
                        "id": id.name(), "mutated": mutate, "holds": true, "samples": samples,
                    }),
                    IdentityOutcome::Fails {
                        sample,
                        instantiation,
                    } => {
                        status = Status::Verdict;
                        json!({
                            "id": id.name(), "mutated": mutate, "holds": false,
                            "sample": sample, "at": instantiation,
                        })
                    }
                };
                out.record(rec);
            }
            Ok(status)
        }
        Command::FreeEq {
            left,
            right,
            samples,
            seed,
        } => {
            let seed = need_seed(cli, *seed)?;
            let l = parse(left, sig)?;
            let r = parse(right, sig)?;
            let res = free_eq(&l, &r, sig, *samples, seed)?;
            out.text(res.to_string());
            match &res {
                FreeEq::Agree { samples, skipped } => {
                    out.record(json!({ "agree": true, "samples": samples, "skipped": skipped }));
                    Ok(Status::Ok)
                }
                FreeEq::Differ { sample, point } => {
                    out.record(
                        json!({ "agree": false, "sample": sample, "at": point_json(point) }),
                    );
                    Ok(Status::Verdict)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut out = Out {
        format: cli.format,
        buf: Vec::new(),
    };
    let code = match run(&cli, &mut out) {
        Ok(Status::Ok) => 0,
        Ok(Status::Verdict) => 1,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let mut stdout = io::stdout().lock();
    for line in &out.buf {
        if writeln!(stdout, "{line}").is_err() {
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}
