use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bseries(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bseries"))
        .args(args)
        .output()
        .expect("spawn bseries")
}

fn golden(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    std::fs::read_to_string(p).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn bell_matches_golden_files() {
    let o = bseries(&["bell", "--n", "10"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("bell_n10.json"));
    let o = bseries(&["--format", "csv", "bell", "--n", "10"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("bell_n10.csv"));
}

#[test]
fn outputs_are_reproducible() {
    let args = ["certify", "--family", "theta", "--rho", "1/3", "--signs", "random", "--target", "1e6"];
    let a = bseries(&args);
    let b = bseries(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);

    // The thread count is echoed in the header but must not change the result.
    let mut one = vec!["--parallel", "1"];
    one.extend_from_slice(&args);
    let c = bseries(&one);
    assert_eq!(json(&a)["result"], json(&c)["result"]);
    assert_eq!(json(&c)["config"]["parallel"], 1);

    let d = bseries(&["--seed", "7", args[0], args[1], args[2], args[3], args[4], args[5], args[6]]);
    assert_ne!(json(&a)["result"], json(&d)["result"]);
}

#[test]
fn every_output_carries_the_config_header() {
    let o = bseries(&["--precision", "128", "eval", "--family", "sin", "--x", "1"]);
    let v = json(&o);
    assert_eq!(v["config"]["precision_bits"], 128);
    assert_eq!(v["tool"], "bseries");
    assert!(v["version"].is_string());

    let o = bseries(&["--format", "table", "bell", "--n", "3", "--op", "ratios"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# bseries "));
    assert!(lines.next().unwrap().starts_with("# config precision_bits=256"));
}

#[test]
fn exit_codes() {
    assert_eq!(bseries(&["bell", "--n", "4"]).status.code(), Some(0));
    // Gaussian: no certificate, honestly inconclusive.
    let o = bseries(&["certify", "--family", "gaussian", "--chi", "1/2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["status"], "inconclusive");

    let o = bseries(&["eval", "--spec", "{\"rule\":\"nope\"}", "--x", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("malformed series spec"), "{err}");
    assert!(err.contains("Series specs"), "{err}");

    assert_eq!(bseries(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(bseries(&["--precision", "8", "bell"]).status.code(), Some(1));
    assert_eq!(bseries(&["--help"]).status.code(), Some(0));
}

#[test]
fn certificate_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let o = bseries(&[
        "--out",
        cert.to_str().unwrap(),
        "certify",
        "--family",
        "theta",
        "--rho",
        "1/2",
        "--signs",
        "alternating",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(v["result"]["certificate"]["reflected"], true);

    let o = bseries(&["--precision", "512", "certify", "--recheck", cert.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["status"], "ok");

    // Tamper with a stored x_m^4: the recheck must refuse it.
    let mut bad = v["result"]["certificate"].clone();
    let w = &mut bad["witnesses"][0];
    let t = w["x4"].as_str().unwrap().to_string();
    w["x4"] = Value::from(format!("{t}1"));
    let tampered = dir.path().join("bad.json");
    std::fs::write(&tampered, serde_json::to_string(&bad).unwrap()).unwrap();
    let o = bseries(&["certify", "--recheck", tampered.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn spec_file_and_inline_agree() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"rule":"gaussian","lambda":"1","m":0}"#;
    let path = dir.path().join("g.json");
    std::fs::write(&path, spec).unwrap();
    let a = bseries(&["eval", "--spec", spec, "--x", "1/2"]);
    let b = bseries(&["eval", "--spec", path.to_str().unwrap(), "--x", "1/2"]);
    let c = bseries(&["eval", "--family", "gaussian", "--x", "1/2"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(json(&a)["result"], json(&b)["result"]);
    assert_eq!(json(&a)["result"], json(&c)["result"]);
}
