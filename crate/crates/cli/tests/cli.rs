//! End-to-end tests of the binary: exit codes, output records, and the
//! stdin path.

use std::io::Write;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_tracecalc");

const FD_SPEC: &str = r#"
eventtype open(fd) matches {event:"func_post", name:"fs.open", res:fd};
eventtype close(fd) matches {event:"func_pre", name:"close", args:[fd]};
Main = {let fd; open(fd) close(fd) Main} \/ empty;
"#;

const OPTIONAL_SPEC: &str = r#"
eventtype a() matches {id:"a"};
eventtype b() matches {id:"b"};
Main = (a() \/ empty) ((a() b()) \/ empty);
"#;

fn spec_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new()
        .suffix(".tc")
        .tempfile()
        .expect("create temp spec");
    f.write_all(text.as_bytes()).expect("write spec");
    f
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).stdout(Stdio::piped()).stderr(Stdio::piped());
    match stdin {
        Some(input) => {
            cmd.stdin(Stdio::piped());
            let mut child = cmd.spawn().expect("spawn tracecalc");
            child
                .stdin
                .take()
                .expect("piped stdin")
                .write_all(input.as_bytes())
                .expect("write events");
            child.wait_with_output().expect("collect output")
        }
        None => {
            cmd.stdin(Stdio::null());
            cmd.output().expect("run tracecalc")
        }
    }
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(str::to_string)
        .collect()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn open_line(fd: i64) -> String {
    format!("{{\"event\":\"func_post\",\"name\":\"fs.open\",\"res\":{fd}}}\n")
}

fn close_line(fd: i64) -> String {
    format!("{{\"event\":\"func_pre\",\"name\":\"close\",\"args\":[{fd}]}}\n")
}

#[test]
fn check_accepts_contractive_spec() {
    let spec = spec_file(FD_SPEC);
    let out = run(&["check", "--spec", spec.path().to_str().unwrap()], None);
    assert_eq!(code(&out), 0, "{out:?}");
}

#[test]
fn check_rejects_non_contractive_spec() {
    let spec = spec_file("eventtype a() matches {id:\"a\"};\nT = T a();\n");
    let out = run(&["check", "--spec", spec.path().to_str().unwrap()], None);
    assert_eq!(code(&out), 2, "{out:?}");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not contractive"), "{err}");
    assert!(err.contains('T'), "cycle should name T: {err}");
}

#[test]
fn check_rejects_broken_syntax_with_location() {
    let spec = spec_file("Main = ;\n");
    let out = run(&["check", "--spec", spec.path().to_str().unwrap()], None);
    assert_eq!(code(&out), 3, "{out:?}");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1:8"), "diagnostic should carry a span: {err}");
}

#[test]
fn check_missing_file_is_an_input_error() {
    let out = run(&["check", "--spec", "/nonexistent/x.tc"], None);
    assert_eq!(code(&out), 4, "{out:?}");
}

#[test]
fn monitor_matched_pair_is_accepted() {
    let spec = spec_file(FD_SPEC);
    let events = format!("{}{}", open_line(42), close_line(42));
    let out = run(
        &[
            "monitor",
            "--spec",
            spec.path().to_str().unwrap(),
            "--format",
            "json",
        ],
        Some(&events),
    );
    assert_eq!(code(&out), 0, "{out:?}");
    let lines = stdout_lines(&out);
    assert_eq!(lines.len(), 3);
    let records: Vec<serde_json::Value> = lines
        .iter()
        .map(|l| serde_json::from_str(l).expect("one JSON object per line"))
        .collect();
    assert_eq!(records[0]["status"], "ok");
    assert_eq!(records[0]["accepting"], false);
    assert_eq!(records[1]["status"], "ok");
    assert_eq!(records[1]["accepting"], true);
    assert_eq!(records[2]["final"], "accepted");
}

#[test]
fn monitor_wrong_descriptor_violates_at_index_1() {
    let spec = spec_file(FD_SPEC);
    let events = format!("{}{}", open_line(42), close_line(43));
    let out = run(
        &[
            "monitor",
            "--spec",
            spec.path().to_str().unwrap(),
            "--format",
            "json",
        ],
        Some(&events),
    );
    assert_eq!(code(&out), 1, "{out:?}");
    let lines = stdout_lines(&out);
    let violation: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
    assert_eq!(violation["status"], "violation");
    assert_eq!(violation["index"], 1);
    let fin: serde_json::Value = serde_json::from_str(&lines[2]).unwrap();
    assert_eq!(fin["final"], "violated");
    assert_eq!(fin["at"], 1);
}

#[test]
fn monitor_unmatched_open_is_incomplete() {
    let spec = spec_file(FD_SPEC);
    let out = run(
        &[
            "monitor",
            "--spec",
            spec.path().to_str().unwrap(),
            "--format",
            "json",
        ],
        Some(&open_line(42)),
    );
    assert_eq!(code(&out), 0, "{out:?}");
    let lines = stdout_lines(&out);
    let fin: serde_json::Value = serde_json::from_str(lines.last().unwrap()).unwrap();
    assert_eq!(fin["final"], "incomplete");
}

#[test]
fn monitor_malformed_line_aborts_by_default() {
    let spec = spec_file(FD_SPEC);
    let events = format!("{}garbage\n{}", open_line(42), close_line(42));
    let out = run(
        &["monitor", "--spec", spec.path().to_str().unwrap()],
        Some(&events),
    );
    assert_eq!(code(&out), 4, "{out:?}");
}

#[test]
fn monitor_skip_bad_lines_continues() {
    let spec = spec_file(FD_SPEC);
    let events = format!("{}garbage\n{}", open_line(42), close_line(42));
    let out = run(
        &[
            "monitor",
            "--spec",
            spec.path().to_str().unwrap(),
            "--skip-bad-lines",
        ],
        Some(&events),
    );
    assert_eq!(code(&out), 0, "{out:?}");
    let lines = stdout_lines(&out);
    assert_eq!(lines.last().unwrap(), "final: accepted");
}

#[test]
fn monitor_events_from_file() {
    let spec = spec_file(FD_SPEC);
    let mut events = tempfile::NamedTempFile::new().unwrap();
    write!(events, "{}{}", open_line(7), close_line(7)).unwrap();
    let out = run(
        &[
            "monitor",
            "--spec",
            spec.path().to_str().unwrap(),
            "--events",
            events.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&out), 0, "{out:?}");
}

#[test]
fn enumerate_optional_spec_lists_three_traces() {
    let spec = spec_file(OPTIONAL_SPEC);
    let out = run(
        &[
            "enumerate",
            "--spec",
            spec.path().to_str().unwrap(),
            "--horizon",
            "3",
        ],
        None,
    );
    assert_eq!(code(&out), 0, "{out:?}");
    assert_eq!(stdout_lines(&out), ["λ", "a()", "a() a() b()"]);
}

#[test]
fn enumerate_minimal_spec_lists_only_the_empty_trace() {
    let spec = spec_file("Main = empty;\n");
    let out = run(
        &["enumerate", "--spec", spec.path().to_str().unwrap()],
        None,
    );
    assert_eq!(code(&out), 0, "{out:?}");
    assert_eq!(stdout_lines(&out), ["λ"]);
}

#[test]
fn enumerate_fd_spec_with_pool() {
    let spec = spec_file(FD_SPEC);
    let out = run(
        &[
            "enumerate",
            "--spec",
            spec.path().to_str().unwrap(),
            "--horizon",
            "2",
            "--pool",
            "42,17",
        ],
        None,
    );
    assert_eq!(code(&out), 0, "{out:?}");
    assert_eq!(
        stdout_lines(&out),
        ["λ", "open(17) close(17)", "open(42) close(42)"]
    );
}

#[test]
fn enumerate_is_deterministic_across_runs() {
    let spec = spec_file(FD_SPEC);
    let args = [
        "enumerate",
        "--spec",
        spec.path().to_str().unwrap(),
        "--horizon",
        "4",
        "--pool",
        "1,2,3",
    ];
    let first = run(&args, None);
    let second = run(&args, None);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn enumerate_empty_pool_is_an_input_error() {
    let spec = spec_file(FD_SPEC);
    let out = run(
        &[
            "enumerate",
            "--spec",
            spec.path().to_str().unwrap(),
            "--pool",
            "",
        ],
        None,
    );
    assert_eq!(code(&out), 4, "{out:?}");
}

#[test]
fn equiv_small_run_passes() {
    let out = run(
        &[
            "equiv", "--count", "10", "--seed", "7", "--horizon", "4",
            "--format", "json",
        ],
        None,
    );
    assert_eq!(code(&out), 0, "{out:?}");
    let lines = stdout_lines(&out);
    assert_eq!(lines.len(), 1);
    let report: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(report["pairs_checked"], 10);
    assert_eq!(report["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn equiv_zero_count_passes_with_empty_report() {
    let out = run(&["equiv", "--count", "0"], None);
    assert_eq!(code(&out), 0, "{out:?}");
}
