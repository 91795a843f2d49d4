use std::process::{Command, Output};

use wenforge::codec::parse_trace;
use wenforge::{canonically_equal, parse, MoveKind};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wenforge"))
        .args(args)
        .env_remove("WENFORGE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap().trim_end().to_string()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

#[test]
fn type_labels() {
    assert_eq!(stdout(&["type", "w O1+ w U1+ w"]), "odd (1)");
    assert_eq!(stdout(&["type", "O1+ U1+"]), "even (0)");
    assert_eq!(stdout(&["type", "w O1+ / U1+"]), "link (1, 0)");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["canon", "O1+ U1+"]), 0);
    assert_eq!(code(&["canon", "O1+ U1-"]), 2);
    assert_eq!(code(&["validate", "O1+ O1+"]), 1);
    assert_eq!(code(&["apply", "O1+ U1+", "R8 c1 p0"]), 1);
    assert_eq!(code(&["apply", "O1+ U1+", "R9 c1 p0"]), 2);
    assert_eq!(code(&["search", "w", "-"]), 1);
    assert_eq!(code(&["bogus"]), 2);
}

#[test]
fn validate_lists_every_violation() {
    let out = run(&["validate", "O1+ O1+ O2-"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 3, "{err}");
}

#[test]
fn json_output() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&["--json", "type", "w / O1+ U1+"])).unwrap();
    assert_eq!(v["deltas"], serde_json::json!([1, 0]));
    let out = run(&["--json", "search", "w", "-"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["stats"]["reason"], "TypeMismatch");
}

#[test]
fn mirror_and_reduce() {
    assert_eq!(stdout(&["mirror", "O1+ U2- / O2- U1+"]), "O1- U2+ / O2+ U1-");
    assert_eq!(stdout(&["mirror", "O1+ U2- / O2- U1+", "--component", "2"]), "O1+ U2+ / O2+ U1+");
    assert_eq!(stdout(&["mirror", "w O1+ U1+", "--component", "1"]), "w O1- U1-");
    assert_eq!(code(&["mirror", "w O1+ U1+", "--component", "2"]), 2);
    assert_eq!(stdout(&["reduce", "O1+ w U1+ w"]), "O1+ U1+");
    assert_eq!(stdout(&["reduce", "O1+ w U1+ w", "--arcs", "adoubleprime"]), "O1- U1-");
    assert_eq!(stdout(&["reduce", "w O1+ w U1+ w", "--wen", "2"]), "O1+ w U1+");
}

#[test]
fn slide_output_replays() {
    let text = stdout(&["slide", "w O1+ U1+", "--wen", "1", "--to", "2"]);
    let t = parse_trace(&text).unwrap();
    assert_eq!(t.len(), 2);
    assert_eq!(t.verify().unwrap(), parse("O1- U1- w").unwrap());
}

#[test]
fn seed_from_environment() {
    let flag = stdout(&["rand", "--seed", "9", "--chords", "4", "--wens", "3"]);
    let env = Command::new(env!("CARGO_BIN_EXE_wenforge"))
        .args(["rand", "--chords", "4", "--wens", "3"])
        .env("WENFORGE_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(flag, String::from_utf8(env.stdout).unwrap().trim_end());
    assert_ne!(flag, stdout(&["rand", "--seed", "10", "--chords", "4", "--wens", "3"]));
}

fn pipeline(rand_args: &[&str], extra: &[&str]) -> (String, String) {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.trace");
    let output = dir.path().join("out.trace");
    std::fs::write(&input, stdout(rand_args)).unwrap();
    let mut args = vec!["transpile", input.to_str().unwrap(), "-o", output.to_str().unwrap()];
    args.extend_from_slice(extra);
    stdout(&args);
    let verified = stdout(&["verify", output.to_str().unwrap()]);
    (std::fs::read_to_string(&input).unwrap(), std::fs::read_to_string(&output).unwrap() + &verified)
}

#[test]
fn transpile_then_verify_odd() {
    for seed in 0..8 {
        let s = seed.to_string();
        let (input, out) = pipeline(
            &["rand", "--seed", &s, "--chords", "2", "--wens", "1", "--trace", "8"],
            &["--checkpoints"],
        );
        let t = parse_trace(out.split("ok ").next().unwrap()).unwrap();
        assert!(t.steps.iter().all(|s| s.checkpoint.is_some()));
        assert_eq!(t.count(MoveKind::is_w4), 0);
        let end = parse_trace(&input).unwrap().verify().unwrap();
        assert!(canonically_equal(&t.verify().unwrap(), &end));
    }
}

#[test]
fn transpile_then_verify_even_and_links() {
    for seed in 0..8 {
        let s = seed.to_string();
        for (wens, comps) in [("0", "1"), ("1", "2"), ("0", "2")] {
            let (input, out) = pipeline(
                &["rand", "--seed", &s, "--chords", "2", "--wens", wens, "--components", comps, "--trace", "8"],
                &[],
            );
            let t = parse_trace(out.split("ok ").next().unwrap()).unwrap();
            assert_eq!(t.count(MoveKind::is_w4), 0);
            let end = parse_trace(&input).unwrap().verify().unwrap();
            assert!(canonically_equal(&t.verify().unwrap(), &end), "seed {seed}");
        }
    }
}

#[test]
fn tampered_checkpoint_fails_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.trace");
    std::fs::write(&path, "INIT O1+ U1+\nMOVE R1Del c1 p0\nDIAG O1+ U1+\n").unwrap();
    let out = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step 1"));
    std::fs::write(&path, "INIT O1+ U1+\nMOVE R1Del c1 p0\nDIAG -\n").unwrap();
    assert_eq!(code(&["verify", path.to_str().unwrap()]), 0);
}

#[test]
fn search_finds_short_path() {
    let out = stdout(&["search", "O1+ U1+", "-", "--moveset", "R1"]);
    let t = parse_trace(&out).unwrap();
    assert_eq!(t.len(), 1);
    assert_eq!(t.verify().unwrap(), parse("-").unwrap());
}

#[test]
fn moves_lists_parseable_specs() {
    let out = stdout(&["moves", "w O1+ U1+", "--moveset", "wen"]);
    for line in out.lines() {
        let applied = run(&["apply", "w O1+ U1+", line]);
        assert!(applied.status.success(), "{line}");
    }
    assert!(out.lines().count() >= 3);
}
