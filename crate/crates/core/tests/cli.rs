//! Process-level checks of the binary: exit codes and stderr.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_twochannel"));
    for var in [
        "TWOCHANNEL_CONFIG",
        "TWOCHANNEL_OUT",
        "TWOCHANNEL_SEED",
        "TWOCHANNEL_THREADS",
    ] {
        cmd.env_remove(var);
    }
    cmd
}

#[test]
fn misspelled_key_is_named_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"env": {"xI": 0.2}}"#).unwrap();
    let out = bin()
        .arg("calibrate")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("env.xI"), "{err}");
}

#[test]
fn environment_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("reproduce-all")
        .args(["--stage", "regress"])
        .env("TWOCHANNEL_OUT", dir.path())
        .env("TWOCHANNEL_SEED", "5")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m["seed"], 5);
}
