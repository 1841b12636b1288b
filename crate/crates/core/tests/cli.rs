use std::fs;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gravcollapse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gravcollapse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn presets_are_listed() {
    let out = gravcollapse(&["presets"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["penrose_micron", "trapped_ion", "n_component_sweep"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn json_report_has_expected_fields() {
    let out = gravcollapse(&["run", "--preset", "trapped_ion", "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &v["rows"][0];
    assert!(row["F_grav_N"].as_f64().unwrap() > 0.0);
    assert!(row["dE_grav_J"].is_null());
    assert!(row["tau_s"].is_null());
    assert_eq!(v["metadata"]["constants_version"], "CODATA 2018");
}

#[test]
fn csv_has_force_column() {
    let out = gravcollapse(&["run", "--preset", "trapped_ion", "--format", "csv"]);
    assert!(out.status.success());
    let header = stdout(&out).lines().next().unwrap().to_owned();
    assert!(header.split(',').any(|c| c == "F_em_N"), "{header}");
}

#[test]
fn table_is_default_format() {
    let out = gravcollapse(&["run", "--preset", "penrose_micron"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("penrose_micron"));
}

#[test]
fn output_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("report.json");
    let out = gravcollapse(&[
        "run",
        "--preset",
        "penrose_micron",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["scenario"], "penrose_micron");
}

#[test]
fn oracle_is_reproducible_and_seed_sensitive() {
    let run = |seed: &str| {
        let out = gravcollapse(&[
            "oracle",
            "--preset",
            "penrose_micron",
            "--format",
            "json",
            "--samples",
            "20000",
            "--seed",
            seed,
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        out.stdout
    };
    assert_eq!(run("5"), run("5"));
    assert_ne!(run("5"), run("6"));
}

#[test]
fn scenario_file_runs() {
    let dir = TempDir::new().unwrap();
    let path = write(
        &dir,
        "g.toml",
        r#"
name = "gauss"
shape = "gaussian"
sigma = "50 nm"
mass = "2e-20 kg"
charge = "1 e"
separations = ["10 nm", "200 nm"]
output_format = "json"
"#,
    );
    let out = gravcollapse(&["run", "--scenario", &path]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[1]["dE_grav_J"].as_f64().unwrap() > rows[0]["dE_grav_J"].as_f64().unwrap());
}

#[test]
fn check_accepts_valid_and_rejects_invalid() {
    let dir = TempDir::new().unwrap();
    let good = write(
        &dir,
        "good.toml",
        "name = \"s\"\nshape = \"uniform_sphere\"\nradius = \"1 um\"\nmass = \"1e-17 kg\"\nseparations = [\"3 um\"]\n",
    );
    let out = gravcollapse(&["check", "--scenario", &good]);
    assert!(out.status.success(), "{}", stderr(&out));

    let bad = write(
        &dir,
        "bad.toml",
        "name = \"s\"\nshape = \"uniform_sphere\"\nradius = \"1 um\"\nmass = \"1e-17\"\nseparations = [\"3 um\"]\n",
    );
    let out = gravcollapse(&["check", "--scenario", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 4") && err.contains("mass"), "{err}");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let conflict = write(
        &dir,
        "c.toml",
        "preset = \"penrose_micron\"\nmass = \"1 kg\"\n",
    );
    for args in [
        vec!["run", "--preset", "no_such_preset"],
        vec!["run", "--scenario", "/nonexistent/scenario.toml"],
        vec!["run", "--scenario", conflict.as_str()],
        vec!["run", "--preset", "trapped_ion", "--samples", "10"],
    ] {
        let out = gravcollapse(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn computation_errors_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let path = write(
        &dir,
        "huge.toml",
        "name = \"huge\"\nshape = \"uniform_sphere\"\nradius = \"1 m\"\nmass = \"1e300 kg\"\nseparations = [\"3 m\"]\n",
    );
    let out = gravcollapse(&["run", "--scenario", &path]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn echo_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let original = write(
        &dir,
        "orig.toml",
        r#"
preset = "penrose_micron"
seed = 99
weighting_mode = "born"

[overrides]
separations = ["1.5 um", "4 um"]
"#,
    );
    let first = gravcollapse(&["echo-config", "--scenario", &original]);
    assert!(first.status.success(), "{}", stderr(&first));
    let echoed = write(&dir, "echo.toml", &stdout(&first));
    let second = gravcollapse(&["echo-config", "--scenario", &echoed]);
    assert_eq!(stdout(&first), stdout(&second));

    let report = |p: &str| gravcollapse(&["run", "--scenario", p, "--format", "json"]).stdout;
    assert_eq!(report(&original), report(&echoed));
}
