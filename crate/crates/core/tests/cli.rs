use std::process::{Command, Output};

fn utt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_utt"))
        .args(args)
        .env_remove("UTT_DEFAULT_PRIME")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_all_with_explicit_settings_passes() {
    let out = utt(&[
        "verify", "all", "--p", "3", "--q", "2", "--N", "20", "--W", "12", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let last = stdout(&out).lines().last().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&last).unwrap();
    assert_eq!(v["summary"]["failed"], 0);
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn pretty_xn_window() {
    let out = utt(&["matrix", "Xn", "--n", "2", "--W", "4", "--format", "pretty"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], ["0", "0", "1", "0"]);
    assert!(rows.iter().all(|r| r[0] == "0" && r[1] == "0"));
}

#[test]
fn non_primitive_q_is_a_config_error() {
    let out = utt(&["verify", "all", "--p", "5", "--q", "7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(utt(&["matrix", "Q"]).status.code(), Some(2));
    assert_eq!(utt(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(
        utt(&["verify", "xn", "--nmax", "8", "--W", "5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        utt(&["basis", "c", "--k", "30", "--N", "10"]).status.code(),
        Some(2)
    );
    assert_eq!(utt(&["--help"]).status.code(), Some(0));
}

#[test]
fn identity_window_golden() {
    let out = utt(&[
        "matrix", "Rn", "--n", "1", "--W", "2", "--p", "3", "--q", "2", "--N", "20",
    ]);
    assert_eq!(out.status.code(), Some(0));
    // R_1 = R - I on a 2x2 window: diag(0, q_hat - 1) plus the shift.
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["rows"][0], serde_json::json!(["0", "1"]));
    assert_eq!(v["rows"][1][0], "0");
    let out = utt(&["matrix", "Xn", "--n", "0", "--W", "2"]);
    assert_eq!(
        stdout(&out).trim(),
        r#"{"p":3,"N":20,"W":2,"rows":[["1","0"],["0","1"]]}"#
    );
}

#[test]
fn runs_are_byte_identical() {
    let args = [
        "verify", "all", "--seed", "11", "--trials", "20", "--format", "csv",
    ];
    let a = utt(&args);
    let b = utt(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_changes_report() {
    let a = stdout(&utt(&["verify", "conjugation", "--trials", "3", "--seed", "1"]));
    let b = stdout(&utt(&["verify", "conjugation", "--trials", "3", "--seed", "2"]));
    assert_eq!(a.lines().count(), b.lines().count());
    assert_ne!(a, b);
}

#[test]
fn env_default_prime_and_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_utt"))
        .args(["verify", "rpower", "--nmax", "2", "--W", "4"])
        .env("UTT_DEFAULT_PRIME", "7")
        .output()
        .unwrap();
    let last = stdout(&out).lines().last().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&last).unwrap();
    assert_eq!(v["config"]["p"], 7);
    assert_eq!(v["config"]["q"], 3);

    let out = Command::new(env!("CARGO_BIN_EXE_utt"))
        .args(["verify", "rpower", "--nmax", "2", "--W", "4", "--p", "5"])
        .env("UTT_DEFAULT_PRIME", "7")
        .output()
        .unwrap();
    let last = stdout(&out).lines().last().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&last).unwrap();
    assert_eq!(v["config"]["p"], 5);
}

#[test]
fn qbinom_and_basis_commands() {
    let out = utt(&["qbinom", "--n", "4", "--k", "2"]);
    assert_eq!(stdout(&out).trim(), "[1,1,2,1,1]");
    let out = utt(&["basis", "f", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["weight"], 3);
    assert_eq!(v["terms"].as_array().unwrap().len(), 4);
}
