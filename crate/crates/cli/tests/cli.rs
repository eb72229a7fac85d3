use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn honesty() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_honesty"));
    cmd.env_remove("HONESTY_OUT_DIR");
    cmd
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn run_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    for (name, code, verdict) in [
        ("unit-ladder-honest", 0, "honest"),
        ("geometric-ladder-dishonest", 2, "dishonest"),
    ] {
        let out = honesty()
            .args(["run", &format!("builtin:{name}"), "--out"])
            .arg(dir.path().join(name))
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(code), "{}", stdout(&out));
        assert!(stdout(&out).contains(&format!("verdict     {verdict}")));
        for file in ["timeseries.csv", "defects.csv", "summary.toml", "density.csv"] {
            let written = std::fs::read(dir.path().join(name).join(file)).unwrap();
            let frozen = std::fs::read(fixture(name).join(file)).unwrap();
            assert!(written == frozen, "{name}/{file} differs from the fixture");
        }
    }
}

#[test]
fn env_var_sets_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = honesty()
        .env("HONESTY_OUT_DIR", dir.path())
        .args(["run"])
        .arg(fixture("explicit-kernel.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("summary.toml").exists());
    // --out beats the environment
    let other = tempfile::tempdir().unwrap();
    let out = honesty()
        .env("HONESTY_OUT_DIR", dir.path())
        .args(["run"])
        .arg(fixture("explicit-kernel.toml"))
        .arg("--out")
        .arg(other.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(other.path().join("summary.toml").exists());
}

#[test]
fn honesty_window() {
    let run = |window: &str| {
        honesty()
            .args(["honesty", "builtin:geometric-ladder-dishonest", "--window", window])
            .output()
            .unwrap()
    };
    let early = run("0.5,1");
    assert_eq!(early.status.code(), Some(0), "{}", stdout(&early));
    let late = run("1,2");
    assert_eq!(late.status.code(), Some(2));
    assert!(stdout(&late).contains("limit       1.0000000000000000e0"));
    let bad = run("2,1");
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn resolvent_lambda() {
    let out = honesty()
        .args(["resolvent", "builtin:geometric-ladder-dishonest", "--lambda", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("limit       2.32544157934"));
    let out = honesty()
        .args(["resolvent", "builtin:unit-ladder-honest", "--lambda", "0.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let billiard = honesty()
        .args(["resolvent"])
        .arg(fixture("disk-small.toml"))
        .args(["--lambda", "1"])
        .output()
        .unwrap();
    assert_eq!(billiard.status.code(), Some(1));
}

#[test]
fn cap_override_makes_a_run_inconclusive() {
    // three orders cannot settle the geometric ladder's defect
    let out = honesty()
        .args(["honesty", "builtin:geometric-ladder-dishonest", "--window", "0,1.5", "--n-cap", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    assert!(stdout(&out).contains("cap-reached"));
}

#[test]
fn seed_override_on_billiards() {
    let run = |seed: &str| {
        let out = honesty()
            .args(["honesty"])
            .arg(fixture("square-small.toml"))
            .args(["--window", "0,3", "--seed", seed])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        stdout(&out)
    };
    assert_eq!(run("5"), run("5"));
    // a seed on exact initial data is a configuration error
    let out = honesty()
        .args(["run", "builtin:unit-ladder-honest", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("density.seed"));
}

#[test]
fn bad_input_exits_with_one() {
    let out = honesty().args(["run", "builtin:nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = honesty().args(["run", "/no/such/file.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = honesty()
        .args(["run", "builtin:unit-ladder-honest", "--tol=-1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run.tol"));
    // usage errors must not look like a dishonest verdict
    for args in [&["run"][..], &["honesty", "builtin:unit-ladder-honest", "--window", "1"], &["frobnicate"]] {
        let out = honesty().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
    let help = honesty().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn list_names_the_builtins() {
    let out = honesty().arg("list").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["unit-ladder-honest", "geometric-ladder-dishonest", "disk-billiard"] {
        assert!(text.contains(&format!("builtin:{name}")));
    }
}
