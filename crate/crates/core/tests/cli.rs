//! The binary's subcommands and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scade2b-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scade2b")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn translate_writes_the_golden_machines() {
    for (src, golden) in [
        ("compute_sum.scade", "compute_sum.mch"),
        ("protocol_v1.scade", "protocol_v1.mch"),
        ("protocol_v2.scade", "protocol_v2.mch"),
    ] {
        let out = scratch(golden);
        let o = run(&["translate", &fixture(src), "-o", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let got = std::fs::read_to_string(&out).unwrap();
        let want = std::fs::read_to_string(fixture(golden)).unwrap();
        assert!(scade2b::bmachine::tokens_equal(&got, &want), "{src}");
    }
}

#[test]
fn translate_reports_cycles_with_a_position() {
    let o = run(&["translate", &fixture("cyclic.scade")]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("cyclic.scade:3:"), "{err}");
    assert!(err.contains("instantaneous"), "{err}");
}

#[test]
fn translate_errors_exit_two() {
    let src = scratch("bad_pragma.scade");
    std::fs::write(&src, "--@invariant x = = 1\nnode n(x: int32) returns (y: int32) let y = x; tel\n").unwrap();
    let o = run(&["translate", src.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("bad_pragma.scade:1:"), "{}", stderr(&o));
}

#[test]
fn unicode_flag_changes_the_spelling() {
    let o = run(&["translate", &fixture("protocol_v1.scade"), "--unicode"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains('∈'));
}

#[test]
fn reference_trace_is_equivalent() {
    let o = run(&["simulate", &fixture("compute_sum.scade"), "--trace", &fixture("compute_sum.trace")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("equivalent, 5 cycle(s) compared"), "{}", stdout(&o));
}

#[test]
fn mutated_machine_diverges() {
    let golden = run(&["translate", &fixture("compute_sum.scade")]);
    let text = stdout(&golden);
    assert!(text.contains("store(0) := store(1);"));
    let path = scratch("mutated.mch");
    std::fs::write(&path, text.replacen("store(0) := store(1);", "", 1)).unwrap();
    let o = run(&[
        "simulate",
        &fixture("compute_sum.scade"),
        "--trace",
        &fixture("compute_sum.trace"),
        "--machine",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("divergent at cycle 4"), "{}", stdout(&o));
}

#[test]
fn seeded_simulation_is_deterministic() {
    let args = ["simulate", &fixture("compute_sum.scade"), "--seed", "0", "--cycles", "20", "--side", "scade"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 20);
    let both = run(&["simulate", &fixture("compute_sum.scade"), "--seed", "0", "--cycles", "20"]);
    assert_eq!(code(&both), 0, "{}", stdout(&both));
}

#[test]
fn b_side_prints_cycles_in_trace_notation() {
    let o = run(&["simulate", &fixture("compute_sum.scade"), "--trace", &fixture("compute_sum.trace"), "--side", "b"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("fby_out=0 output=[1,4,9,16,25]"), "{}", lines[1]);
}

#[test]
fn runtime_errors_exit_four() {
    let src = scratch("div.scade");
    std::fs::write(&src, "node n(x: uint8) returns (y: uint8) let y = x / (x - x); tel\n").unwrap();
    let trace = scratch("div.trace");
    std::fs::write(&trace, "x=1\n").unwrap();
    for side in ["scade", "b", "both"] {
        let o = run(&["simulate", src.to_str().unwrap(), "--trace", trace.to_str().unwrap(), "--side", side]);
        assert_eq!(code(&o), 4, "{side}: {}{}", stdout(&o), stderr(&o));
    }
}

#[test]
fn check_finds_the_protocol_counterexample() {
    let o = run(&["check", &fixture("protocol_v1.scade")]);
    assert_eq!(code(&o), 5);
    let out = stdout(&o);
    assert!(out.contains("after 3 step(s)"), "{out}");
    assert!(out.contains("HandleEvent(input_event=ConnectAck) -> TRUE"), "{out}");
    let o = run(&["check", &fixture("protocol_v1.mch"), "--format", "trace"]);
    assert_eq!(code(&o), 5);
    assert!(stdout(&o).contains("op=HandleEvent input_event=DisconnectRequest"));
}

#[test]
fn check_verifies_the_repaired_protocol() {
    let o = run(&["check", &fixture("protocol_v2.scade")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("4 state(s)"), "{}", stdout(&o));
    let o = run(&["check", &fixture("protocol_v2.scade"), "--max-states", "1"]);
    assert_eq!(code(&o), 6);
}

#[test]
fn check_needs_bounds_for_wide_parameters() {
    let o = run(&["check", &fixture("compute_sum.scade"), "--max-states", "20"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("--domain"), "{}", stderr(&o));
    let o = run(&[
        "check",
        &fixture("compute_sum.scade"),
        "--max-states",
        "20",
        "--domain",
        "input=0..1",
        "--domain",
        "fby_in=0..1",
    ]);
    assert!(matches!(code(&o), 0 | 6), "{}", stderr(&o));
}

#[test]
fn usage_errors_help_and_version() {
    assert_eq!(code(&run(&[])), 64);
    assert_eq!(code(&run(&["simulate", &fixture("compute_sum.scade")])), 64);
    assert_eq!(code(&run(&["check", &fixture("protocol_v2.scade"), "--domain", "oops"])), 64);
    let h = run(&["--help"]);
    assert_eq!(code(&h), 0);
    for sub in ["translate", "simulate", "check"] {
        assert!(stdout(&h).contains(sub));
    }
    let v = run(&["--version"]);
    assert_eq!((code(&v), stdout(&v).trim()), (0, "scade2b 0.1.0"));
}

#[test]
fn missing_input_exits_one() {
    let o = run(&["translate", "/nonexistent/none.scade"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("/nonexistent/none.scade:"));
}
