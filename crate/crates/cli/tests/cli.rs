//! End-to-end checks of the `lab` binary: exit codes, output formats, and
//! byte-level determinism across worker counts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lab"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lab-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

const SMALL_LOGISTIC: &str = r#"
seed = 42

[map]
family = "logistic"
params = [4.0]

[orbit]
n = 20000

[lyapunov]
seeds = 4
window_schedule = [1000, 5000, 20000]
delta_grid = [0.5, 0.1, 0.02]

[shadowing]
epsilon = 0.1
l_min = 3
schedule_start = 1024
schedule_ratio = 2.0

[entropy]
eps_schedule = [0.2]
n_schedule = [4, 5, 6, 7, 8]
katok_epsilon = 0.2
katok_n_schedule = [3, 4, 5, 6]
katok_windows = [2000, 8000, 20000]
types_n = [4, 40]
types_l = [2, 8]
submul_n = 8
submul_splits = [[4, 4]]
"#;

#[test]
fn types_subcommand_writes_exact_counts() {
    let dir = tmp_dir("types");
    let cfg = write_config(&dir, SMALL_LOGISTIC);
    let out = dir.join("out");
    let status = lab()
        .args(["types", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let mut rdr = csv::Reader::from_path(out.join("types.csv")).unwrap();
    let mut found = false;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        if &rec[0] == "4" && &rec[1] == "2" {
            assert_eq!(&rec[2], "8");
            found = true;
        }
    }
    assert!(found, "types.csv misses the (n=4, L=2) row");
    // manifest lists the csv with its digest
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"][0]["path"], "types.csv");
    assert!(manifest.get("wall_clock_ms").is_none());
}

#[test]
fn malformed_config_exits_2() {
    let dir = tmp_dir("badcfg");
    let cfg = write_config(
        &dir,
        r#"
seed = 1
[map]
family = "logistic"
[orbit]
n = -5
"#,
    );
    let output = lab()
        .args(["lyapunov", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn unknown_field_exits_2() {
    let dir = tmp_dir("unknown");
    let cfg = write_config(
        &dir,
        r#"
seed = 1
typo_field = true
[map]
family = "logistic"
[orbit]
n = 100
"#,
    );
    let output = lab()
        .args(["types", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn infeasible_epsilon_exits_3() {
    let dir = tmp_dir("infeasible");
    // epsilon1 = 0.25 for the logistic map; 0.3 is infeasible
    let cfg = write_config(
        &dir,
        r#"
seed = 1
[map]
family = "logistic"
params = [4.0]
[orbit]
n = 5000
[shadowing]
epsilon = 0.3
l_min = 3
"#,
    );
    let output = lab()
        .args(["shadowing", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "{}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn shadowing_outputs_parse_and_report_lemmas() {
    let dir = tmp_dir("shadow");
    let cfg = write_config(&dir, SMALL_LOGISTIC);
    let out = dir.join("out");
    let status = lab()
        .args(["shadowing", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let dec: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("decomposition.json")).unwrap()).unwrap();
    assert_eq!(dec["l_min"], 3);
    let lemmas: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("lemma_summary.json")).unwrap()).unwrap();
    assert_eq!(lemmas["lemma_delta_checked"], lemmas["lemma_delta_passed"]);
    assert!(out.join("coverage.csv").exists());
}

#[test]
fn gap_outputs_parse() {
    let dir = tmp_dir("gap");
    let cfg = write_config(&dir, SMALL_LOGISTIC);
    let out = dir.join("out");
    let status =
        lab().args(["gap", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let gap: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("gap_report.json")).unwrap()).unwrap();
    assert!(gap["report"]["h_top_est"].as_f64().unwrap() > 0.0);
    assert_eq!(gap["report"]["violations"], 0);
    assert!(out.join("spanning.csv").exists());
    assert!(out.join("types.csv").exists());
}

#[test]
fn identical_configs_yield_identical_bytes_across_worker_counts() {
    let dir = tmp_dir("determinism");
    let cfg = write_config(&dir, SMALL_LOGISTIC);
    let (out1, out2, out3) = (dir.join("o1"), dir.join("o2"), dir.join("o3"));
    for (out, workers) in [(&out1, "1"), (&out2, "4"), (&out3, "2")] {
        let status = lab()
            .args(["all", "--config"])
            .arg(&cfg)
            .args(["--workers", workers, "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let mut names: Vec<String> = fs::read_dir(&out1)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.len() >= 8, "expected the full artifact set, got {names:?}");
    for name in &names {
        let a = fs::read(out1.join(name)).unwrap();
        let b = fs::read(out2.join(name)).unwrap();
        let c = fs::read(out3.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between 1 and 4 workers");
        assert_eq!(a, c, "{name} differs between 1 and 2 workers");
    }
}
