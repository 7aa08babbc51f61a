use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gspec");
const GRAMMAR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/grammars/air_travel.grammar");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

/// gen-corpus, train and evaluate into `dir`.
fn pipeline(dir: &Path) {
    ok(&[
        "gen-corpus",
        "--grammar",
        GRAMMAR,
        "--n",
        "60",
        "--seed",
        "42",
        "--out",
        &p(dir, "train.jsonl"),
    ]);
    ok(&[
        "gen-corpus",
        "--grammar",
        GRAMMAR,
        "--n",
        "20",
        "--seed",
        "4242",
        "--out",
        &p(dir, "test.jsonl"),
    ]);
    ok(&[
        "train",
        "--grammar",
        GRAMMAR,
        "--corpus",
        &p(dir, "train.jsonl"),
        "--out-model",
        &p(dir, "model.txt"),
        "--out-grammar",
        &p(dir, "special.grammar"),
        "--out-report",
        &p(dir, "report.txt"),
    ]);
    ok(&[
        "evaluate",
        "--grammar",
        GRAMMAR,
        "--model",
        &p(dir, "model.txt"),
        "--specialized",
        &p(dir, "special.grammar"),
        "--test",
        &p(dir, "test.jsonl"),
        "--warmup",
        "2",
        "--out-records",
        &p(dir, "records.txt"),
    ]);
}

#[test]
fn end_to_end_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path());
    pipeline(b.path());
    for f in [
        "train.jsonl",
        "test.jsonl",
        "model.txt",
        "special.grammar",
        "report.txt",
        "records.txt",
    ] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(!x.is_empty(), "{f} empty");
        assert_eq!(x, y, "{f} differs");
    }
    let check = ok(&[
        "check",
        "--grammar",
        GRAMMAR,
        "--specialized",
        &p(a.path(), "special.grammar"),
    ]);
    assert!(check.contains("scheme new"));
    assert!(check.contains("type_graph_acyclic true"));
}

#[test]
fn parse_prints_analyses_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    let out = ok(&[
        "parse",
        "--grammar",
        GRAMMAR,
        "--model",
        &p(dir.path(), "model.txt"),
        "--specialized",
        &p(dir.path(), "special.grammar"),
        "--prune",
        "--text",
        "show me flights to boston",
        "--max-analyses",
        "2",
    ]);
    let header = out.lines().next().unwrap();
    assert!(header.starts_with("# input analyses="), "{header}");
    assert!(out.lines().count() <= 3);

    let out = run(&[
        "parse",
        "--grammar",
        GRAMMAR,
        "--text",
        "boston boston boston",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("(no parse)"));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = run(&[
        "parse",
        "--grammar",
        GRAMMAR,
        "--prune",
        "--text",
        "show me flights",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--prune needs --model"));

    let out = run(&["parse", "--grammar", "/nonexistent/file", "--text", "x"]);
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "train",
        "--grammar",
        GRAMMAR,
        "--corpus",
        GRAMMAR,
        "--scheme",
        "sideways",
        "--out-model",
        &p(dir.path(), "m"),
        "--out-grammar",
        &p(dir.path(), "g"),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
