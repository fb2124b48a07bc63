//! Black-box tests of the command-line surface: exit codes, JSON output and
//! artifact determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fermipack"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn encode_writes_artifact_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = bin()
            .args(["encode", "--modes", "8", "--electrons", "2", "--seed", "5"])
            .arg("--out")
            .arg(path)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{out:?}");
    }
    let text_a = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text_a, std::fs::read_to_string(&b).unwrap());

    let check = bin().arg("decode-check").arg("--code").arg(&a).output().unwrap();
    assert_eq!(check.status.code(), Some(0));
    assert!(stdout(&check).contains("28 states"));
}

#[test]
fn encode_rejects_degenerate_mode_count() {
    // M <= 2N is a usage error.
    let out = bin()
        .args(["encode", "--modes", "3", "--electrons", "2", "--out", "/tmp/never.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_flags_exit_2() {
    let out = bin().args(["bounds", "--modes", "8"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["no-such-command"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_json_round_trips() {
    let out = bin()
        .args(["bounds", "--modes", "22", "--electrons", "2", "--json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["gv_qubits"], 13);
    assert_eq!(v["impossibility_qubits"], 8);
    assert_eq!(v["qubit_cap"], 18);
}

#[test]
fn fci_prints_bundled_energy() {
    let out = bin()
        .args(["fci", "--json"])
        .arg("--hamiltonian")
        .arg(data("h4_2e.ham"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let e = v["energy"].as_f64().unwrap();
    assert!((e - (-1.1372479554488615)).abs() < 1e-9);
}

#[test]
fn groups_reports_counts_and_bound() {
    let out = bin()
        .args(["groups", "--json"])
        .arg("--hamiltonian")
        .arg(data("h6_2e.ham"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["bound"], 1 + 15 + 15);
    let count = v["group_count"].as_u64().unwrap();
    assert!(count <= 31);
    assert_eq!(v["groups"].as_array().unwrap().len() as u64, count);

    // A diagonal-only Hamiltonian collapses to a single group.
    let dir = tempfile::tempdir().unwrap();
    let diag = dir.path().join("diag.ham");
    std::fs::write(&diag, "MODES 4\nELECTRONS 2\nECORE 0\n1B 1 1 -1\n1B 2 2 -0.5\n").unwrap();
    let out = bin()
        .args(["groups", "--json"])
        .arg("--hamiltonian")
        .arg(&diag)
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["group_count"], 1);
    assert_eq!(v["groups"][0]["x_key"], "0000");
}

#[test]
fn vqe_runs_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let result_path = dir.path().join("vqe.json");
    let out = bin()
        .args(["vqe", "--layers", "2", "--restarts", "3", "--json"])
        .arg("--hamiltonian")
        .arg(data("h4_2e.ham"))
        .arg("--code")
        .arg(data("identity_m4_2e.code.json"))
        .arg("--out")
        .arg(&result_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["cnot_count"], 2 * 3);
    assert_eq!(v["parameter_count"], 4 * 3);
    assert!(v["best_energy"].as_f64().unwrap() >= v["exact_energy"].as_f64().unwrap() - 1e-8);
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result_path).unwrap()).unwrap();
    assert_eq!(file["best_energy"], v["best_energy"]);
}

#[test]
fn selftest_exit_codes() {
    let out = bin()
        .args([
            "selftest", "--modes", "4", "--electrons", "2", "--trials", "5", "--quiet",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("5/5 pass"));

    let out = bin()
        .args([
            "selftest",
            "--modes",
            "4",
            "--electrons",
            "2",
            "--trials",
            "3",
            "--inject-sign-fault",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn table_finds_small_cell() {
    let out = bin()
        .args([
            "table",
            "--electrons",
            "1",
            "--qubits",
            "3",
            "--max-modes",
            "6",
            "--budget-seconds",
            "20",
            "--json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["best_modes"].as_u64().unwrap() >= 4);
}
