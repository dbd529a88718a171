use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn morphboat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphboat"))
        .current_dir(dir)
        .env_remove("MORPHBOAT_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(
        &std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display())),
    )
    .unwrap()
}

fn csv_column(path: PathBuf, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].to_string())
        .collect()
}

#[test]
fn two_lengths_are_a_rank_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = morphboat(
        dir.path(),
        &["identify", "--lengths", "0,0.5", "--out", "id"],
    );
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("at least 3"), "{}", stderr(&o));
    assert!(json(dir.path().join("id/manifest.json"))["outcome"]
        .as_str()
        .unwrap()
        .contains("at least 3"));
}

#[test]
fn missing_log_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.toml"),
        "[identify]\nlogs = [{ path = \"nowhere/straight.csv\", kind = \"straight\" }]\n",
    )
    .unwrap();
    let o = morphboat(
        dir.path(),
        &["identify", "--config", "cfg.toml", "--out", "id"],
    );
    assert_ne!(code(&o), 0);
    assert!(
        stderr(&o).contains("nowhere/straight.csv"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[dock]\nreps = 3\n").unwrap();
    assert_eq!(
        code(&morphboat(dir.path(), &["dock", "--config", "bad.toml"])),
        2
    );
    assert_eq!(
        code(&morphboat(dir.path(), &["dock", "--config", "absent.toml"])),
        2
    );
    assert_eq!(
        code(&morphboat(dir.path(), &["track", "--shape", "triangle"])),
        2
    );
    assert_eq!(
        code(&morphboat(
            dir.path(),
            &["identify", "--lengths", "0,0.2,0.9"]
        )),
        2
    );
}

#[test]
fn zero_repetitions_give_an_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = morphboat(
        dir.path(),
        &[
            "dock",
            "--repetitions",
            "0",
            "--form",
            "expanded",
            "--out",
            "d",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(dir.path().join("d/report_expanded.json"));
    assert_eq!(report["trials"].as_array().unwrap().len(), 0);
    assert!(report["mean_time"].is_null());
    assert!(!dir.path().join("d/report_contracted.json").exists());
}

#[test]
fn single_block_skips_expansion_for_assembly() {
    let dir = tempfile::tempdir().unwrap();
    let o = morphboat(dir.path(), &["bridge", "--blocks", "1", "--out", "b"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let phases = csv_column(dir.path().join("b/timeline.csv"), "phase");
    assert!(phases.iter().any(|p| p == "DockAssembly"));
    assert!(!phases.iter().any(|p| p == "ExpandForAssembly"));
    let summary = json(dir.path().join("b/summary.json"));
    assert_eq!(summary["blocks_placed"], 1);
    assert_eq!(summary["success"], true);
    let frames = csv_column(dir.path().join("b/frames.csv"), "blocks_placed");
    assert_eq!(frames.last().unwrap(), "1");
}

#[test]
fn mission_abort_still_writes_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.toml"),
        "[bridge.driver]\napproach_speed = 10.0\ndock_timeout = 0.0\n[bridge.mission]\nretry_cap = 0\n",
    )
    .unwrap();
    let o = morphboat(
        dir.path(),
        &[
            "bridge", "--config", "cfg.toml", "--blocks", "2", "--out", "b",
        ],
    );
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let summary = json(dir.path().join("b/summary.json"));
    assert_eq!(summary["success"], false);
    assert_eq!(summary["failing_phase"], "DockPickup");
}

#[test]
fn rerun_reproduces_artifacts_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&morphboat(
            dir.path(),
            &[
                "bridge",
                "--blocks",
                "2",
                "--water",
                "turbulent",
                "--seed",
                "5",
                "--out",
                "b"
            ]
        )),
        0
    );
    let o = morphboat(dir.path(), &["rerun", "b/manifest.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        std::fs::read(dir.path().join("b/log.csv")).unwrap(),
        std::fs::read(dir.path().join("b-rerun/log.csv")).unwrap()
    );

    let mut manifest = json(dir.path().join("b/manifest.json"));
    let arts = manifest["artifacts"].as_array_mut().unwrap();
    let log = arts.iter_mut().find(|a| a["path"] == "log.csv").unwrap();
    log["sha256"] = Value::String("0".repeat(64));
    std::fs::write(
        dir.path().join("tampered.json"),
        serde_json::to_string(&manifest).unwrap(),
    )
    .unwrap();
    let o = morphboat(dir.path(), &["rerun", "tampered.json", "--out", "again"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("log.csv differs"), "{}", stderr(&o));
}

#[test]
fn flags_override_file_values_and_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.toml"),
        "seed = 3\n[dock]\nrepetitions = 0\nwater = \"turbulent\"\n",
    )
    .unwrap();
    let o = morphboat(
        dir.path(),
        &["dock", "--config", "cfg.toml", "--seed", "9", "--out", "d"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = json(dir.path().join("d/manifest.json"));
    assert_eq!(m["seed"], 9);
    assert_eq!(m["effective_config"]["seed"], 9);
    assert_eq!(m["effective_config"]["dock"]["water"], "turbulent");
    assert_eq!(m["config_paths"][0], "cfg.toml");
    let written = std::fs::read_to_string(dir.path().join("d/config.toml")).unwrap();
    assert!(written.contains("seed = 9"));
}

#[test]
fn output_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_morphboat"))
        .current_dir(dir.path())
        .env("MORPHBOAT_OUT", dir.path().join("root"))
        .args(["dock", "--repetitions", "0"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("root/dock/manifest.json").exists());
}

#[test]
fn identification_recovers_the_generating_functions() {
    let dir = tempfile::tempdir().unwrap();
    let o = morphboat(dir.path(), &["identify", "--out", "id"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(dir.path().join("id/report.json"));
    assert!(report["deviation_from_truth"].as_f64().unwrap() < 0.02);
    assert!(dir.path().join("id/residuals.svg").exists());

    // The fitted file is itself a config.
    let o = morphboat(
        dir.path(),
        &["simulate", "--config", "id/polynomials.toml", "--out", "s"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    // Re-identify from the written logs.
    let mut cfg = String::from("[identify]\nlogs = [\n");
    for entry in std::fs::read_dir(dir.path().join("id/logs")).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        let kind = name.split('_').next().unwrap();
        cfg.push_str(&format!(
            "  {{ path = \"id/logs/{name}\", kind = \"{kind}\" }},\n"
        ));
    }
    cfg.push_str("]\n");
    std::fs::write(dir.path().join("import.toml"), cfg).unwrap();
    let o = morphboat(
        dir.path(),
        &["identify", "--config", "import.toml", "--out", "id2"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let again = json(dir.path().join("id2/report.json"));
    let m = json(dir.path().join("id2/manifest.json"));
    assert_eq!(m["inputs"].as_array().unwrap().len(), 18);
    for fam in ["m12", "m3", "xuv", "nr"] {
        for c in ["c2", "c1", "c0"] {
            let a = report["polynomials"][fam][c].as_f64().unwrap();
            let b = again["polynomials"][fam][c].as_f64().unwrap();
            assert!(
                (a - b).abs() <= 1e-6 * (1.0 + a.abs()),
                "{fam}.{c}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn nmpc_beats_pid_on_the_expanded_square() {
    let dir = tempfile::tempdir().unwrap();
    let o = morphboat(
        dir.path(),
        &[
            "track", "--shape", "square", "--form", "expanded", "--out", "t",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = json(dir.path().join("t/table.json"));
    let mae = |ctrl: &str| {
        table
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["controller"] == ctrl)
            .unwrap()["mae_position"]
            .as_f64()
            .unwrap()
    };
    assert!(mae("nmpc") < mae("pid"));
    assert!(dir.path().join("t/path_square.svg").exists());

    let o = morphboat(
        dir.path(),
        &[
            "track", "--shape", "square", "--form", "expanded", "--out", "t2",
        ],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        std::fs::read(dir.path().join("t/table.csv")).unwrap(),
        std::fs::read(dir.path().join("t2/table.csv")).unwrap()
    );
}

#[test]
fn circle_completes_a_lap() {
    let dir = tempfile::tempdir().unwrap();
    let o = morphboat(
        dir.path(),
        &[
            "track",
            "--shape",
            "circle",
            "--controller",
            "nmpc",
            "--form",
            "contracted",
            "--out",
            "c",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = csv_column(dir.path().join("c/logs/circle_nmpc_contracted_0.csv"), "t");
    let end: f64 = t.last().unwrap().parse().unwrap();
    assert!(end >= 2.0 * std::f64::consts::PI * 1.5 / 0.2 - 0.1, "{end}");
}
