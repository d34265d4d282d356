use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "iterate,nash_gap,q_tracking_error,potential_value,min_state_visits";

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpg-lab"))
        .args(args)
        .env_remove("MPG_LAB_OUT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(
        &path,
        format!(
            "game = \"G2\"\nseeds = [1, 0]\niterations = 20000\nmetrics_cadence = 5000\n{extra}"
        ),
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn catalog_lists_builtin_games() {
    let out = lab(&["catalog"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["G1", "G2", "G3", "G4", "GZ"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{text}");
    }
}

#[test]
fn exported_game_validates() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["catalog", "G4"]);
    assert!(out.status.success());
    let file = dir.path().join("g4.json");
    fs::write(&file, &out.stdout).unwrap();
    let out = lab(&["validate", file.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("potential identity"));
}

#[test]
fn non_potential_game_fails_validation() {
    let out = lab(&["validate", "GZ"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAILED"));
}

#[test]
fn run_writes_csv_and_summary_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = lab(&[
        "run",
        "--config",
        &cfg,
        "--out",
        a.to_str().unwrap(),
        "--jobs",
        "1",
    ]);
    assert!(
        out.status.code().is_some_and(|c| c <= 1),
        "{}",
        stderr(&out)
    );
    let out = lab(&[
        "run",
        "--config",
        &cfg,
        "--out",
        b.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(
        out.status.code().is_some_and(|c| c <= 1),
        "{}",
        stderr(&out)
    );
    for seed in [0, 1] {
        let name = format!("seed_{seed}.csv");
        let first = fs::read_to_string(a.join(&name)).unwrap();
        assert_eq!(first.lines().next(), Some(HEADER));
        assert_eq!(first.lines().count(), 5);
        assert_eq!(first, fs::read_to_string(b.join(&name)).unwrap());
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    let seeds: Vec<u64> = summary["seeds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, vec![0, 1]);
    assert!(summary["pass_fraction"]["all"].is_number());
    assert!(summary["seeds"][0]["nash_report"]["gaps"].is_array());
}

#[test]
fn flags_override_the_config_and_environment_overrides_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "output_dir = \"ignored\"\n");
    let env_out = dir.path().join("env");
    let out = Command::new(env!("CARGO_BIN_EXE_mpg-lab"))
        .args([
            "run",
            "--config",
            &cfg,
            "--out",
            "flag",
            "--seeds",
            "3..5",
            "--iterations",
            "3000",
            "--cadence",
            "1000",
        ])
        .env("MPG_LAB_OUT", &env_out)
        .output()
        .unwrap();
    assert!(
        out.status.code().is_some_and(|c| c <= 1),
        "{}",
        stderr(&out)
    );
    for seed in [3, 4] {
        let csv = fs::read_to_string(env_out.join(format!("seed_{seed}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 4);
    }
    assert!(!Path::new("flag").exists());
}

#[test]
fn bad_config_reports_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "game = \"G2\"\nseeds = [1]\niterations = \"lots\"\n").unwrap();
    let out = lab(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("line 3") && err.contains("iterations"),
        "{err}"
    );

    fs::write(&path, "game = \"G2\"\nseeds = [1, 1]\n").unwrap();
    let out = lab(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("seeds[1]"));
}

#[test]
fn flow_emits_policy_columns() {
    let out = lab(&["flow", "G2", "--dt", "0.01", "--horizon", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(
        text.lines().next(),
        Some("tau,phi,nash_gap,pi_0_0_0,pi_0_0_1,pi_1_0_0,pi_1_0_1")
    );
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn flow_from_a_policy_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pi.json");
    fs::write(&path, r#"{"policy": [[[1, 0]], [[1, 0]]]}"#).unwrap();
    let out = lab(&[
        "flow",
        "G2",
        "--horizon",
        "0.5",
        "--init",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let last = stdout(&out).lines().last().unwrap().to_string();
    assert!(last.ends_with(",1,0,1,0"), "{last}");
}

#[test]
fn certify_reports_equilibria() {
    let dir = tempfile::tempdir().unwrap();
    let nash = dir.path().join("nash.json");
    fs::write(&nash, r#"{"policy": [[[0, 1]], [[0, 1]]]}"#).unwrap();
    let out = lab(&["certify", "G2", nash.to_str().unwrap(), "--epsilon", "1e-6"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["certified"], true);

    let off = dir.path().join("off.json");
    fs::write(&off, r#"{"policy": [[[1, 0]], [[0, 1]]]}"#).unwrap();
    let out = lab(&["certify", "G2", off.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report["max_gap"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn help_documents_the_csv_schema() {
    let out = lab(&["run", "--help"]);
    assert!(stdout(&out).contains(HEADER));
    assert!(stdout(&lab(&["--help"])).contains(HEADER));
}

#[test]
fn accept_runs_selected_criteria() {
    let out = lab(&["accept", "--only", "10,1"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS [10]") && text.contains("PASS [ 1]"));
    assert_eq!(lab(&["accept", "--only", "12"]).status.code(), Some(2));
}
