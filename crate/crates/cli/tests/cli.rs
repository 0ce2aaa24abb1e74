//! End-to-end runs of the `levy2` binary: exit codes and the JSON report.

use std::process::{Command, Output};

use levy2_cli::{RunReport, Status};

fn levy2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy2"))
        .args(args)
        .env("LEVY_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> RunReport {
    RunReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

#[test]
fn compute_succeeds_with_report() {
    let out = levy2(&["compute", "--tol", "1e-6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.command, "compute");
    assert_eq!(r.status, Status::Ok);
    assert!((r.value.unwrap() - 3.49277983865703).abs() < 1e-5);
    // the report survives a round trip unchanged
    assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
}

#[test]
fn literal_form_fails_verification() {
    let out = levy2(&["verify", "quick", "--x-denominator", "literal"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&out).status, Status::VerifyFailed);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &["compute", "--tol", "abc"][..],
        &["simulate", "--dim", "3"],
        &["oracle-mc", "--samples", "10"],
        &["--threads", "0", "compute"],
        &["no-such-command"],
    ] {
        assert_eq!(levy2(args).status.code(), Some(64), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(levy2(&["--help"]).status.code(), Some(0));
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = ["simulate", "--dim", "2", "--thetas", "200", "--qmax", "1e5", "--seed", "4"];
    let (a, b) = (report(&levy2(&args)), report(&levy2(&args)));
    assert_eq!((a.value, a.error), (b.value, b.error));
    let mc = ["oracle-mc", "--samples", "1e5", "--seed", "4"];
    let (a, b) = (report(&levy2(&mc)), report(&levy2(&mc)));
    assert_eq!(a.value, b.value);
    assert_eq!(a.seed, Some(4));
}

#[test]
fn thread_count_does_not_change_results() {
    let mc = ["oracle-mc", "--samples", "2e5", "--seed", "8"];
    let one = report(&levy2(&mc));
    let mut args = vec!["--threads", "3"];
    args.extend(mc);
    assert_eq!(one.value, report(&levy2(&args)).value);
}

#[test]
fn domain_dump_writes_vertices() {
    let dir = std::env::temp_dir().join(format!("levy2-domain-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f.csv");
    let out = levy2(&["domain", "--dump", path.to_str().unwrap(), "--", "-0.5", "0.5", "0.3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.lines().count() > 4);
    std::fs::remove_dir_all(dir).unwrap();
}
