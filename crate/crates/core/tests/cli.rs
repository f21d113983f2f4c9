mod common;

use std::fs;

use chainsmith::{evaluate, parse_chain};
use num_bigint::BigInt;

use common::{cli, json};

#[test]
fn exit_code_classes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.chain"), "+ 0 0\n* 3 1\n").unwrap();
    fs::write(d.join("sub.chain"), "+ 0 0\n- 1 0\n").unwrap();

    assert_eq!(cli(d, &["construct", "tower", "--n", "2"]).code, 0);

    for args in [
        &["frobnicate"][..],
        &["eval", "--chain-file", "bad.chain"],
        &["eval", "--chain-file", "missing.chain"],
        &["alpha", "--chain-file", "sub.chain"],
        &["extremal", "--additions", "4", "--mults", "3"],
        &["census", "--bits", "4", "--max-len", "6"],
        &["gap", "--n", "4"],
        &["search", "--value", "0", "--model", "slp"],
        &[
            "search",
            "--value",
            "12",
            "--model",
            "slp",
            "--max-len",
            "9",
        ],
        &["construct", "brauer", "--value", "10", "--k", "40"],
    ] {
        let run = cli(d, args);
        assert_eq!(run.code, 1, "{args:?}: {}", run.stderr);
        assert!(!run.stderr.is_empty());
    }

    let memo = d.join("m.jsonl");
    let memo = memo.to_str().unwrap();
    let budget = cli(
        d,
        &[
            "--json",
            "search",
            "--value",
            "65535",
            "--model",
            "amc",
            "--budget-nodes",
            "5",
            "--memo",
            memo,
        ],
    );
    assert_eq!(budget.code, 2);
    let j = json(&budget);
    assert_eq!(j["status"], "budget-exhausted");
    assert_eq!(j["proven_optimal"], false);

    let capped = cli(
        d,
        &[
            "--json",
            "search",
            "--value",
            "65535",
            "--model",
            "amc",
            "--max-len",
            "5",
            "--memo",
            memo,
        ],
    );
    assert_eq!(capped.code, 2);
    assert_eq!(json(&capped)["status"], "infeasible-at-cap");
    assert!(!memo_exists(d), "unproven results are not recorded");
}

fn memo_exists(d: &std::path::Path) -> bool {
    d.join("m.jsonl").exists()
}

#[test]
fn eval_tower_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("t.chain"), "+ 0 0\n* 1 1\n* 2 2\n- 3 0\n").unwrap();
    let run = cli(dir.path(), &["eval", "--chain-file", "t.chain"]);
    assert_eq!(run.code, 0);
    assert!(
        run.stdout.starts_with("value: 15\ntrace: 1 2 4 16 15\n"),
        "{}",
        run.stdout
    );

    let j = json(&cli(
        dir.path(),
        &["--json", "eval", "--chain-file", "t.chain"],
    ));
    assert_eq!(j["value"], "15");
    assert_eq!(j["subtractions"], 1);
}

#[test]
fn search_uses_and_fills_the_memo() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["--json", "search", "--value", "255", "--model", "amc"];

    let first = json(&cli(d, &args));
    assert_eq!(first["memo"]["hit"], false);
    assert_eq!(first["memo"]["recorded"], "inserted");
    assert_eq!(first["length"], 6);
    let text = fs::read_to_string(d.join("chainsmith-memo.jsonl")).unwrap();
    assert!(text.starts_with("{\"format\":\"chainsmith-memo\",\"version\":1}\n"));
    assert_eq!(text.lines().count(), 2);

    let second = json(&cli(d, &args));
    assert_eq!(second["memo"]["hit"], true);
    assert_eq!(second["witness"], first["witness"]);
    assert_eq!(second["length"], first["length"]);

    fs::write(d.join("chainsmith-memo.jsonl"), "garbage\n").unwrap();
    assert_eq!(cli(d, &args).code, 1);
}

#[test]
fn constructions_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let run = cli(dir.path(), &["construct", "brauer", "--value", "2025"]);
    assert_eq!(run.code, 0);
    let p = parse_chain(&run.stdout).unwrap();
    assert_eq!(evaluate(&p).0, BigInt::from(2025));
    assert!(p.len() <= 13);

    let j = json(&cli(
        dir.path(),
        &["--json", "construct", "fermat-amc", "--n", "4"],
    ));
    assert_eq!(j["value"], "65535");
    assert_eq!(j["length"], 8);
}

#[test]
fn equal_detects_difference_with_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("a.chain"), "+ 0 0\n+ 1 0\n* 2 1\n").unwrap();
    fs::write(d.join("b.chain"), "+ 0 0\n* 1 1\n+ 2 1\n+ 3 0\n").unwrap();
    let run = cli(
        d,
        &[
            "--json", "equal", "--left", "a.chain", "--right", "b.chain", "--seed", "3",
        ],
    );
    assert_eq!(run.code, 0);
    let j = json(&run);
    assert_eq!(j["verdict"], "not-equal");
    assert_eq!(j["error_bound"], "0/1");
    let p = j["witness_modulus"].as_u64().unwrap();
    let (l, r) = (
        j["residues"][0].as_u64().unwrap(),
        j["residues"][1].as_u64().unwrap(),
    );
    assert_eq!((l, r), (6 % p, 7 % p));

    let exact = json(&cli(
        d,
        &[
            "--json", "equal", "--left", "a.chain", "--right", "b.chain", "--exact",
        ],
    ));
    assert_eq!(exact["equal"], false);
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let run = cli(dir.path(), &["--help"]);
    assert_eq!(run.code, 0);
    for sub in [
        "eval",
        "construct",
        "search",
        "equal",
        "census",
        "extremal",
        "alpha",
        "additions",
        "gap",
    ] {
        assert!(run.stdout.contains(sub), "{sub}");
    }
}
