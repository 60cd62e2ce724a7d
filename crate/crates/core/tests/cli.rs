use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinchlab")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn help_succeeds() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("sweep"));
}

#[test]
fn usage_errors_are_configuration_errors() {
    assert_eq!(code(&run(&["zeta", "--bogus"])), 3);
    assert_eq!(code(&run(&["nosuchcommand"])), 3);
    assert_eq!(code(&run(&[])), 3);
}

#[test]
fn bad_values_are_configuration_errors() {
    assert_eq!(code(&run(&["zeta", "--surface", "1,1", "--s", "2"])), 3);
    assert_eq!(code(&run(&["zeta", "--surface", "1,1,1", "--s", "x"])), 3);
    assert_eq!(code(&run(&["eisenstein", "--s", "2", "--z", "0,-1"])), 3);
    assert_eq!(code(&run(&["sweep", "--quantities", "nothing"])), 3);
}

#[test]
fn zeta_record() {
    let out = run(&["zeta", "--surface", "1,1,1", "--s", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["kind"], "zeta");
    assert_eq!(v["classes_used"], 184);
    assert!(v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn quotient_differs_from_zeta_by_the_pinching_factor() {
    let full = run(&["zeta", "--surface", "0.5,1,1", "--s", "1.5"]);
    let quot = run(&["zeta", "--surface", "0.5,1,1", "--s", "1.5", "--quotient"]);
    let f: serde_json::Value = serde_json::from_str(stdout(&full).trim()).unwrap();
    let q: serde_json::Value = serde_json::from_str(stdout(&quot).trim()).unwrap();
    let diff = f["log_value"][0].as_f64().unwrap() - q["log_value"][0].as_f64().unwrap();
    assert!(diff < 0.0);
}

#[test]
fn scattering_rows_and_tau() {
    let out = run(&["scattering", "--k", "-1,0,1", "--l", "0.5", "--s", "0.75", "--tau"]);
    assert_eq!(code(&out), 0);
    let lines: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0]["gamma"], lines[2]["gamma"]);
    assert_eq!(lines[3]["kind"], "tau_target");
}

#[test]
fn scattering_pole_is_reported() {
    let out = run(&["scattering", "--k", "0", "--s", "1.5"]);
    assert_ne!(code(&out), 0);
    assert!(!out.stderr.is_empty());
}

#[test]
fn csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("modes.csv");
    let out = run(&["scattering", "--k", "1,2", "--s", "0.75", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn fit_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean.csv");
    let noisy = dir.path().join("noisy.csv");
    let bad = dir.path().join("bad.csv");
    let mut a = String::from("l,re,im\n");
    let mut b = a.clone();
    for (i, l) in [0.8f64, 0.4, 0.2, 0.1, 0.05].iter().enumerate() {
        a.push_str(&format!("{l},{},0\n", l * l));
        b.push_str(&format!("{l},{},0\n", l * l * if i % 2 == 0 { 3.0 } else { 1.0 }));
    }
    fs::write(&clean, a).unwrap();
    fs::write(&noisy, b).unwrap();
    fs::write(&bad, "l,re,im\n0.5,nope,0\n").unwrap();

    let out = run(&["fit", "--samples", clean.to_str().unwrap(), "--target", "2", "--max-residual", "1e-9"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((v["alpha"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let out = run(&["fit", "--samples", noisy.to_str().unwrap(), "--max-residual", "0.01"]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&run(&["fit", "--samples", bad.to_str().unwrap()])), 3);
    assert_eq!(code(&run(&["fit", "--samples", dir.path().join("missing.csv").to_str().unwrap()])), 3);
    let unwritable = dir.path().join("no/such/dir/out.jsonl");
    assert_eq!(code(&run(&["fit", "--samples", clean.to_str().unwrap(), "--out", unwritable.to_str().unwrap()])), 1);
}

#[test]
fn sweep_from_config_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(
        &cfg,
        r#"{"l_grid": [0.8, 0.4, 0.2, 0.1], "s_grid": [2.0, [0.75, 0.5]],
            "quantities": ["weighted_eisenstein", "weighted_quotient", "gamma_mode"]}"#,
    )
    .unwrap();
    let one = run(&["sweep", "--config", cfg.to_str().unwrap(), "--threads", "1"]);
    let three = run(&["sweep", "--config", cfg.to_str().unwrap(), "--threads", "3"]);
    assert_eq!(code(&one), 0, "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(stdout(&one).lines().count(), 6);
}

#[test]
fn sweep_rejects_unknown_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(&cfg, r#"{"l_grid": [0.8, 0.4, 0.2, 0.1], "colour": "blue"}"#).unwrap();
    assert_eq!(code(&run(&["sweep", "--config", cfg.to_str().unwrap()])), 3);
}
