//! Output files and the `la-nav` binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use la_nav::artifacts::*;
use la_nav::runner::{preset, run_episode, GoalSpec};
use la_nav::world::Point;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_la-nav"));
    cmd.env_remove("LA_NAV_SEED");
    cmd
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn zero_step_run_has_headers_only() {
    let mut cfg = preset(1).unwrap();
    cfg.world.goal = GoalSpec::Fixed(Point::ORIGIN);
    let record = run_episode(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let arts = emit_artifacts(&record, &cfg, dir.path()).unwrap();

    assert_eq!(
        String::from_utf8(read(&arts.trajectory_csv)).unwrap(),
        "n,x,y,theta,action,flag,d,blocked\n"
    );
    assert_eq!(
        String::from_utf8(read(&arts.probs_csv)).unwrap(),
        "n,p1,p2,p3,p4,p5,p6\n"
    );
    let svg = String::from_utf8(read(&arts.plot_svg)).unwrap();
    assert!(!svg.contains("<polyline"));
    assert!(svg.contains(r#"class="start""#));
    assert!(svg.contains(r#"class="goal""#));

    let summary: RunSummary = serde_json::from_slice(&read(&arts.summary_json)).unwrap();
    assert_eq!(summary.total_steps, 0);
    assert_eq!(summary.final_probs, vec![1.0 / 6.0; 6]);
}

#[test]
fn preset_four_plot_has_two_obstacles() {
    let cfg = preset(4).unwrap().with_seed(6);
    let record = run_episode(&cfg).unwrap();
    let svg = render_svg(&record);
    assert_eq!(svg.matches(r#"class="obstacle""#).count(), 2);
    assert_eq!(svg.matches("<polyline").count(), 1);
    let goal = format!(r#"r="{}""#, record.world.goal_tolerance);
    assert!(svg.contains(&goal));
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let cfg = preset(1).unwrap().with_seed(21);
    let record = run_episode(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let arts = emit_artifacts(&record, &cfg, dir.path()).unwrap();

    let rows = read_trajectory_csv(&arts.trajectory_csv).unwrap();
    assert_eq!(rows, trajectory_rows(&record));
    for (row, step) in rows.iter().zip(&record.steps) {
        assert_eq!(row.x.to_bits(), step.pose_after.x.to_bits());
        assert_eq!(row.y.to_bits(), step.pose_after.y.to_bits());
    }

    let probs = read_probs_csv(&arts.probs_csv).unwrap();
    assert_eq!(probs.len(), record.steps.len());
    for (row, step) in probs.iter().zip(&record.steps) {
        assert_eq!(row.n, step.n);
        assert_eq!(row.probs.as_slice(), step.probs_after.as_slice());
    }

    let summary: RunSummary = serde_json::from_slice(&read(&arts.summary_json)).unwrap();
    assert_eq!(summary, RunSummary::new(&record, &cfg));
}

#[test]
fn run_is_byte_reproducible() {
    let out_a = tempfile::tempdir().unwrap();
    let out_b = tempfile::tempdir().unwrap();
    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["run", "--preset", "4", "--seed", "9", "--out"])
            .arg(out.path())
            .status()
            .unwrap();
        assert!(status.success());
    }
    for f in [TRAJECTORY_FILE, PROBS_FILE, SUMMARY_FILE, PLOT_FILE] {
        assert_eq!(
            read(&out_a.path().join(f)),
            read(&out_b.path().join(f)),
            "{f}"
        );
    }
}

#[test]
fn config_file_and_seed_sources() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, r#"{"preset": 2, "max_steps": 40}"#).unwrap();

    let summary_seed = |out: &Path| {
        let s: RunSummary = serde_json::from_slice(&read(&out.join(SUMMARY_FILE))).unwrap();
        s.seed
    };

    let out = dir.path().join("env");
    let status = bin()
        .env("LA_NAV_SEED", "31")
        .arg("run")
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(summary_seed(&out), 31);
    let s: RunSummary = serde_json::from_slice(&read(&out.join(SUMMARY_FILE))).unwrap();
    assert!(s.total_steps <= 40);
    assert_eq!(s.config["scheme"]["b"], 0.0);

    let out = dir.path().join("flag");
    let status = bin()
        .env("LA_NAV_SEED", "31")
        .args(["run", "--seed", "5", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(summary_seed(&out), 5);
}

#[test]
fn invalid_config_fails_with_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.json");
    fs::write(&cfg_path, "{\"preset\": 1,\n \"scheme\": {\"a\": 1.5}}").unwrap();
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scheme.a"), "{err}");
    assert!(err.contains("line 2"), "{err}");

    let missing = bin()
        .args(["run", "--config", "/nonexistent/cfg.json", "--out"])
        .arg(dir.path().join("o2"))
        .output()
        .unwrap();
    assert!(!missing.status.success());
}

#[test]
fn batch_writes_per_seed_dirs_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "batch", "--preset", "1", "--seeds", "1..3", "-j", "2", "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    for seed in 1..=3 {
        let sub = dir.path().join(format!("seed_{seed}"));
        for f in [TRAJECTORY_FILE, PROBS_FILE, SUMMARY_FILE, PLOT_FILE] {
            assert!(sub.join(f).is_file(), "{}", sub.join(f).display());
        }
    }
    let summary: BatchSummaryFile =
        serde_json::from_slice(&read(&dir.path().join(BATCH_SUMMARY_FILE))).unwrap();
    assert_eq!(summary.summary.runs, 3);
    let seeds: Vec<u64> = summary.runs.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, vec![1, 2, 3]);
}

#[test]
fn batch_with_infeasible_world_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(
        &cfg_path,
        r#"{"world": {"goal": [40, 40], "obstacles": [{"circle": {"center": [0, 0], "radius": 5}}]}}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let status = bin()
        .args(["batch", "--seeds", "1..2", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(!status.success());
    let summary: BatchSummaryFile =
        serde_json::from_slice(&read(&out.join(BATCH_SUMMARY_FILE))).unwrap();
    assert_eq!(summary.summary.config_failures, 2);
}

#[test]
fn presets_listing() {
    let out = bin().args(["presets", "--json"]).output().unwrap();
    assert!(out.status.success());
    let list: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ab: Vec<(f64, f64)> = list
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p["a"].as_f64().unwrap(), p["b"].as_f64().unwrap()))
        .collect();
    assert_eq!(ab, vec![(0.7, 0.7), (0.7, 0.0), (0.0, 0.7), (0.7, 0.7)]);
}
