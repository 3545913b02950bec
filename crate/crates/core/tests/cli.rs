use std::path::PathBuf;
use std::process::{Command, Output};

fn qflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn model_file(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "data", "models", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn fig1a_has_metadata_header_and_closed_form_values() {
    let out = qflow(&["fig1a"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    let meta = lines.next().unwrap();
    assert!(meta.starts_with(&format!("# qflow {}", env!("CARGO_PKG_VERSION"))));
    assert!(meta.contains("phi_over_gamma=0.25,1,4"));
    assert_eq!(
        lines.next().unwrap(),
        "t,d@0.25,d@1,d@4,revival@0.25,revival@1,revival@4"
    );
    assert!(!text.contains('\r'));
    let data = rows(&text);
    assert_eq!(data.len(), 601);
    assert_eq!(data[0][1..4], [1.0, 1.0, 1.0]);
    assert!((data[100][2] - 0.334762099737).abs() < 1e-11);
    assert!(data.iter().all(|r| r[4..].iter().all(|&f| f == 0.0)));
}

#[test]
fn fig1b_starts_at_zero_and_matches_equal_rate_value() {
    let text = stdout(&qflow(&["fig1b", "--phi-over-gamma", "1", "--tmax", "1"]));
    let data = rows(&text);
    assert_eq!(data[0][1..], [0.0, 0.0]);
    let a = (-1.0f64).exp();
    let expected = 4.0 / 81.0 * (1.0 - a).powi(2) * (2.0 + 2.0 * a + 5.0 * a * a);
    assert!((data[100][1] - expected).abs() < 1e-10);
    assert!((data[100][2] - expected).abs() < 1e-10);
}

#[test]
fn fig2_flags_revivals_only_for_strong_driving() {
    let text = stdout(&qflow(&["fig2", "--omega-over-gamma", "0,5"]));
    assert!(text.lines().nth(1).unwrap() == "t,d@0,d@5,revival@0,revival@5");
    let data = rows(&text);
    assert!(data.iter().all(|r| r[3] == 0.0));
    assert!(data.iter().any(|r| r[4] == 1.0));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.csv");
    let out = qflow(&["fig1a", "--tmax", "0.5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let direct = stdout(&qflow(&["fig1a", "--tmax", "0.5"]));
    assert_eq!(std::fs::read_to_string(path).unwrap(), direct);
}

#[test]
fn jobs_setting_does_not_change_output() {
    let one = qflow(&["fig1b", "--tmax", "2", "--jobs", "1"]).stdout;
    let four = Command::new(env!("CARGO_BIN_EXE_qflow"))
        .args(["fig1b", "--tmax", "2"])
        .env("QFLOW_JOBS", "4")
        .output()
        .unwrap()
        .stdout;
    assert_eq!(one, four);
}

#[test]
fn bystander_check_reports_verdict() {
    let text = stdout(&qflow(&["check-bystander", "--model", "depolarizing"]));
    assert!(text.starts_with("true, residual "), "{text}");
    assert!(stdout(&qflow(&[
        "check-bystander",
        "--model",
        "coherent",
        "--omega",
        "2"
    ]))
    .starts_with("true"));
    assert!(stdout(&qflow(&["check-bystander", "--model", "exchange"])).starts_with("false"));
}

#[test]
fn random_scheme_cpf_vanishes_on_bystander_presets() {
    for model in ["depolarizing", "random-bystander"] {
        let out = qflow(&["cpf", "--scheme", "r", "--model", model]);
        assert!(out.status.success());
        for row in rows(&stdout(&out)) {
            assert!(row[2..].iter().all(|c| c.abs() < 1e-10), "{model}: {row:?}");
        }
    }
}

#[test]
fn bound_on_exchange_model_has_non_negative_slack() {
    let out = qflow(&["bound", "--model", "exchange"]);
    assert!(out.status.success());
    assert!(rows(&stdout(&out)).iter().all(|r| r[6] >= -1e-9));
}

#[test]
fn model_files_load() {
    for name in [
        "depolarizing.json",
        "modulated_depolarizing.json",
        "exchange.json",
        "dephasing_mixture.json",
        "telegraph.json",
        "collisional_bystander.json",
    ] {
        let out = qflow(&[
            "td",
            "--model",
            &model_file(name),
            "--tmax",
            "1",
            "--step",
            "0.25",
        ]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_eq!(rows(&stdout(&out)).len(), 5);
    }
}

#[test]
fn configuration_errors_exit_with_2() {
    assert_eq!(
        qflow(&["td", "--model", "no-such-model"]).status.code(),
        Some(2)
    );
    assert_eq!(qflow(&["fig1a", "--gamma=-1"]).status.code(), Some(2));
    assert_eq!(
        qflow(&["fig1a", "--phi-over-gamma", "-0.5"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema":"qflow-model/2"}"#).unwrap();
    assert_eq!(
        qflow(&["td", "--model", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn validate_subset_reports_pass_lines() {
    let out = qflow(&["validate", "--only", "3,4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn unknown_check_is_a_configuration_error() {
    assert_eq!(qflow(&["validate", "--only", "11"]).status.code(), Some(2));
}
