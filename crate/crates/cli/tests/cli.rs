use std::path::Path;
use std::process::{Command, Output};

fn chopper(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chopper")).current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "unknown.json", r#"{"protocol": "constant", "beta": 1.0, "colour": "red"}"#);
    write(dir.path(), "both.json", r#"{"protocol": "constant", "beta": 1.0, "omega": 2.0}"#);
    write(dir.path(), "shape.json", r#"{"protocol": "triangle", "beta": 1.0}"#);
    write(dir.path(), "grid.json", r#"{"protocol": "constant", "beta": 1.0, "n_grid": 1000}"#);
    for cfg in ["unknown.json", "both.json", "shape.json", "grid.json", "missing.json"] {
        let out = chopper(dir.path(), &["envelope", "--config", cfg]);
        assert_eq!(out.status.code(), Some(2), "{cfg}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = chopper(dir.path(), &["figure", "fig9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupted_phase_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = chopper(dir.path(), &["validate", "--corrupt-fosc", "1.5", "--out", "report.json"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn quick_validation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = chopper(dir.path(), &["validate", "quick"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["level"], "quick");
}

#[test]
fn header_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "g2.json",
        r#"{"protocol": "on_off_cosine", "beta": 3.0, "u_over_gamma0": 2.0, "n_grid": 256, "n_tauc": 16, "n_taud": 32, "output": "first.csv"}"#,
    );
    assert!(chopper(dir.path(), &["g2", "--config", "g2.json"]).status.success());
    let first = std::fs::read_to_string(dir.path().join("first.csv")).unwrap();
    let header = first.lines().next().unwrap().strip_prefix("# ").unwrap();
    write(dir.path(), "echo.json", header);
    let out = chopper(dir.path(), &["g2", "--config", "echo.json"]);
    assert!(out.status.success());
    assert_eq!(out.stdout, first.as_bytes());
}

#[test]
fn linear_cavity_gives_coherent_statistics() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "g2.json",
        r#"{"protocol": "rect_on_off", "duty": 0.3, "beta": 1.5, "delta_over_gamma0": 0.5, "n_grid": 512, "n_tauc": 16, "n_taud": 16, "format": "json"}"#,
    );
    let out = chopper(dir.path(), &["g2", "--config", "g2.json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for row in doc["rows"].as_array().unwrap() {
        for k in [2, 3] {
            if let Some(v) = row[k].as_f64() {
                assert!((v - 1.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn figure_writes_one_file_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = chopper(dir.path(), &["--threads", "2", "figure", "fig1b", "--out", "figs"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for beta in ["0.3", "1", "3", "10"] {
        let text = std::fs::read_to_string(dir.path().join(format!("figs/fig1b_beta{beta}.csv"))).unwrap();
        assert_eq!(text.lines().nth(2), Some("tauc_over_T,re_A,im_A,abs_r,abs_t,phase_r"));
    }
}
