use std::path::PathBuf;
use std::process::{Command, Output};

use lpterm_core::{parse, Signature};

fn lpterm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpterm"))
        .args(args)
        .output()
        .expect("spawn lpterm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn certify_truncation() {
    let o = lpterm(&["certify", "--expr", "trunc(x0)", "--sig", "t"]);
    assert_eq!(stdout(&o), "k=0 lambda={0:1}\n");
    assert_eq!(code(&o), 0);
}

#[test]
fn classify_square_is_only_bounded() {
    let o = lpterm(&[
        "classify", "--expr", "sq(x0)", "--sig", "ext", "--box", "0=-3,3",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    assert_eq!(first, "integrability=false finite=false infty=true");
    assert!(out.contains("certificate=none"));
    assert!(out.contains("box x0=[-3,3] -> [0,9]"), "{out}");
}

#[test]
fn eval_sum() {
    let o = lpterm(&["eval", "--expr", "x0 + x1", "--at", "x0=1,x1=2"]);
    assert_eq!(stdout(&o), "3\n");
    assert_eq!(code(&o), 0);
}

#[test]
fn eval_reads_term_files() {
    let path = scratch("term.txt");
    std::fs::write(&path, "tsup[n] cap=x1 : n*(x0) + x0\n").unwrap();
    let o = lpterm(&[
        "eval",
        "--term",
        path.to_str().unwrap(),
        "--at",
        "x0=1/2,x1=5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "5\n");
}

#[test]
fn black_box_certify_is_a_verdict() {
    let o = lpterm(&["certify", "--expr", "sq(x0)", "--sig", "ext"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("not certifiable"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["eval", "--expr", "x0 +", "--at", "x0=1"][..],
        &["eval", "--expr", "sq(x0)", "--at", "x0=1"],
        &["eval", "--at", "x0=1"],
        &["classify", "--expr", "x0", "--box", "0=3,-3"],
        &["axioms", "--model", "quotient:2:2", "--seed", "1"],
        &["--strict", "free-eq", "--left", "x0", "--right", "x0"],
        &["frobnicate"],
    ] {
        let o = lpterm(args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let o = lpterm(&["certify", "--help"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("k=0"));
}

#[test]
fn axioms_hold_and_mutations_fail() {
    let o = lpterm(&["axioms", "--model", "r", "--samples", "300", "--seed", "2"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 16);
    assert!(
        out.lines().all(|l| l.ends_with(" holds samples=300")),
        "{out}"
    );

    let args = [
        "axioms",
        "--model",
        "power:3",
        "--samples",
        "50",
        "--seed",
        "7",
        "--mutate",
    ];
    let o = lpterm(&args);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o), golden("axioms_power3_mutated.txt"));
}

#[test]
fn single_identity_by_name() {
    let o = lpterm(&[
        "axioms",
        "--model",
        "quotient:4:1",
        "--seed",
        "0",
        "--id",
        "T4'",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "T4P holds samples=1000\n");
}

#[test]
fn witness_output_is_golden_and_verifies() {
    let args = [
        "witness", "--expr", "sq(x0)", "--sig", "ext", "--p", "2", "--atoms", "8", "--seed", "5",
    ];
    let o = lpterm(&args);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text, golden("witness_sq_p2.txt"));

    let path = scratch("sq.witness");
    std::fs::write(&path, &text).unwrap();
    let p = path.to_str().unwrap();
    let o = lpterm(&["verify", "--witness", p, "--expr", "sq(x0)", "--sig", "ext"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("verdict=DIVERGES\n"));

    // the identity does not blow the same points up
    let o = lpterm(&["verify", "--witness", p, "--expr", "x0", "--sig", "ext"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).ends_with("verdict=INCONCLUSIVE\n"));
}

#[test]
fn witness_out_flag_writes_the_file() {
    let path = scratch("out.witness");
    let p = path.to_str().unwrap();
    let args = [
        "witness",
        "--expr",
        "abspow(3/2, x0)",
        "--sig",
        "ext",
        "--p",
        "1",
        "--mode",
        "F",
        "--atoms",
        "10",
        "--seed",
        "1",
        "--out",
        p,
    ];
    let o = lpterm(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).ends_with("verdict=DIVERGES\n"));
    let file = std::fs::read_to_string(&path).unwrap();
    assert!(file.starts_with("p=1 mode=F N=10\n"), "{file}");
}

#[test]
fn certified_terms_have_no_witness() {
    let o = lpterm(&[
        "witness", "--expr", "x0 v x1", "--atoms", "3", "--seed", "1", "--budget", "300",
    ]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.starts_with("inconclusive:"), "{out}");
    assert!(out.contains("k=0 lambda={0:1,1:1}"), "{out}");
}

#[test]
fn synthesized_terms_parse_back() {
    let cases: [(&[&str], Signature); 4] = [
        (
            &["synth", "ind-gt", "--var", "0", "--lambda", "3/2"],
            Signature::Truncated,
        ),
        (
            &["synth", "ind-ge", "--var", "1", "--lambda", "1/3"],
            Signature::Truncated,
        ),
        (
            &["synth", "ind-ge-dual", "--var", "0", "--lambda", "2"],
            Signature::Truncated,
        ),
        (
            &[
                "--sig",
                "u",
                "synth",
                "ind-gt-unital",
                "--var",
                "0",
                "--lambda",
                "-1",
            ],
            Signature::Unital,
        ),
    ];
    for (args, sig) in cases {
        let o = lpterm(args);
        assert_eq!(
            code(&o),
            0,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let text = stdout(&o);
        parse(text.trim(), sig).unwrap_or_else(|e| panic!("{text}: {e}"));
    }
}

#[test]
fn synth_indicator_evaluates_to_zero_or_one() {
    let o = lpterm(&["synth", "ind-gt", "--var", "0", "--lambda", "3/2"]);
    let term = stdout(&o);
    for (x, want) in [("1", "0"), ("3/2", "0"), ("8/5", "1"), ("40", "1")] {
        let at = format!("x0={x}");
        let o = lpterm(&["eval", "--expr", term.trim(), "--at", &at]);
        assert_eq!(stdout(&o).trim(), want, "x0={x}");
    }
}

#[test]
fn synth_simple_from_spec_file() {
    let path = scratch("simple.spec");
    std::fs::write(
        &path,
        "# two steps under |x0| + 1\ndominator (x0 v -1*x0) + one\nentry 1 x0>1\nentry 1/2 x0>=3\n",
    )
    .unwrap();
    let args = [
        "--sig",
        "u",
        "synth",
        "simple",
        "--spec",
        path.to_str().unwrap(),
    ];
    let o = lpterm(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let term = stdout(&o);
    for (x, want) in [("0", "0"), ("2", "1"), ("7/2", "3/2")] {
        let at = format!("x0={x}");
        let o = lpterm(&["--sig", "u", "eval", "--expr", term.trim(), "--at", &at]);
        assert_eq!(stdout(&o).trim(), want, "x0={x}");
    }
}

#[test]
fn free_eq_verdicts() {
    let args = [
        "free-eq",
        "--left",
        "x0 v x1 + meet(x0, x1)",
        "--right",
        "x0 + x1",
        "--seed",
        "4",
    ];
    let o = lpterm(&args);
    assert_eq!((code(&o), stdout(&o)), (0, "agree samples=10000\n".into()));

    let args = [
        "free-eq",
        "--left",
        "x0",
        "--right",
        "trunc(x0)",
        "--seed",
        "4",
    ];
    let o = lpterm(&args);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("differ at=x0="));
}

#[test]
fn json_lines_are_json() {
    let o = lpterm(&[
        "--format",
        "json-lines",
        "axioms",
        "--model",
        "r",
        "--samples",
        "20",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 16);
    for line in out.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["holds"], true);
    }
    let o = lpterm(&[
        "certify",
        "--expr",
        "2*x0 + trunc(x1)",
        "--format",
        "json-lines",
    ]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["k"], "0");
    assert_eq!(v["lambda"]["0"], "2");
}

#[test]
fn seeded_runs_are_byte_identical() {
    let runs = [
        &[
            "witness",
            "--expr",
            "sq(x0 + x1)",
            "--sig",
            "ext",
            "--atoms",
            "6",
            "--seed",
            "9",
        ][..],
        &[
            "axioms",
            "--model",
            "quotient:5:2",
            "--samples",
            "100",
            "--seed",
            "11",
        ],
        &[
            "free-eq",
            "--left",
            "x0",
            "--right",
            "tsup[n] cap=x0 v zero : n*(x0)",
            "--seed",
            "3",
        ],
    ];
    for args in runs {
        let a = lpterm(args);
        let b = lpterm(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty(), "{args:?}");
    }
}
