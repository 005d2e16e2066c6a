//! End-to-end checks of the command-line binary: exit codes and
//! byte-identical reruns.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_singular-dde"))
}

#[test]
fn legs_outputs_are_deterministic() {
    let dir = std::env::temp_dir().join("singular-dde-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let run = |tag: &str| {
        let out = dir.join(format!("legs-{tag}"));
        let status = bin()
            .args(["legs", "-A", "5", "--k2", "0.5", "--n", "0", "--samples", "50"])
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        (
            std::fs::read(out.with_extension("csv")).unwrap(),
            std::fs::read(out.with_extension("json")).unwrap(),
        )
    };
    let (csv1, json1) = run("a");
    let (csv2, json2) = run("b");
    assert_eq!(csv1, csv2, "branch CSV differs between identical runs");
    assert_eq!(json1, json2, "bifurcation JSON differs between identical runs");
    let text = String::from_utf8(csv1).unwrap();
    assert!(text.starts_with("# eps="), "config header embedded");
    assert!(text.contains("kind,n,m,K1,T,T1,T2,theta,amplitude,period"));
}

#[test]
fn invalid_configuration_exits_2() {
    let status = bin()
        .args(["legs", "-A", "0.5", "--n", "0", "--out", "/tmp/never-written"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin()
        .args(["cusp", "--k2", "1.5", "--m", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn cusp_prints_locus() {
    let out = bin().args(["cusp", "--m", "2"]).output().unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["A"], 7.0);
    assert_eq!(doc["K1"], 1.5);
}

#[test]
fn profile_writes_three_files() {
    let dir = std::env::temp_dir().join("singular-dde-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("prof");
    let status = bin()
        .args(["profile", "-A", "6", "--k1", "4", "--kind", "type-ii", "--m", "1", "--grid", "60"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for suffix in ["profile.csv", "parametrisation.csv", "verify.json"] {
        let path = dir.join(format!("prof.{suffix}"));
        assert!(path.exists(), "{} missing", path.display());
    }
}
