//! Per-run output files: trajectory and probability CSVs, a JSON summary
//! and a static SVG plot.
//!
//! Floats are written in Rust's shortest round-trip decimal form, so every
//! value reads back bit-identical.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::kinematics::RobotPose;
use crate::runner::{BatchResult, BatchSummary, ExperimentConfig, RunRecord, Termination};
use crate::world::{Bounds, Obstacle, Point};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const PROBS_FILE: &str = "probs.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "plot.svg";
pub const BATCH_SUMMARY_FILE: &str = "batch_summary.json";

pub const TRAJECTORY_HEADER: [&str; 8] = ["n", "x", "y", "theta", "action", "flag", "d", "blocked"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunArtifacts {
    pub trajectory_csv: PathBuf,
    pub probs_csv: PathBuf,
    pub summary_json: PathBuf,
    pub plot_svg: PathBuf,
}

/// One row of `trajectory.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub n: u32,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub action: u8,
    pub flag: u8,
    pub d: f64,
    pub blocked: u8,
}

/// One row of `probs.csv`: step number and the distribution after it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbsRow {
    pub n: u32,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub termination: Termination,
    pub total_steps: u32,
    pub seed: u64,
    pub config_digest: String,
    pub rng_algorithm: String,
    pub goal: Point,
    pub goal_tolerance: f64,
    pub obstacles: Vec<Obstacle>,
    pub bounds: Bounds,
    pub final_pose: RobotPose,
    pub final_probs: Vec<f64>,
    pub config: serde_json::Value,
}

impl RunSummary {
    pub fn new(record: &RunRecord, config: &ExperimentConfig) -> Self {
        let final_probs = match record.steps.last() {
            Some(s) => s.probs_after.as_slice().to_vec(),
            None => record.probs_before(0).as_slice().to_vec(),
        };
        Self {
            termination: record.terminated,
            total_steps: record.total_steps,
            seed: record.seed,
            config_digest: record.config_digest.clone(),
            rng_algorithm: record.rng_algorithm.clone(),
            goal: record.world.goal,
            goal_tolerance: record.world.goal_tolerance,
            obstacles: record.world.obstacles.clone(),
            bounds: record.world.bounds,
            final_pose: record.final_pose(),
            final_probs,
            config: serde_json::to_value(config).expect("config serializes"),
        }
    }
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn trajectory_rows(record: &RunRecord) -> Vec<TrajectoryRow> {
    record
        .steps
        .iter()
        .map(|s| TrajectoryRow {
            n: s.n,
            x: s.pose_after.x,
            y: s.pose_after.y,
            theta: s.pose_after.theta,
            action: s.action.id(),
            flag: s.flag.as_u8(),
            d: s.d_after,
            blocked: s.blocked as u8,
        })
        .collect()
}

pub fn write_trajectory_csv<W: Write>(record: &RunRecord, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for r in trajectory_rows(record) {
        w.write_record([
            r.n.to_string(),
            r.x.to_string(),
            r.y.to_string(),
            r.theta.to_string(),
            r.action.to_string(),
            r.flag.to_string(),
            r.d.to_string(),
            r.blocked.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

pub fn read_trajectory_csv(path: &Path) -> io::Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn write_probs_csv<W: Write>(record: &RunRecord, out: W) -> io::Result<()> {
    let width = record.probs_before(0).len();
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = std::iter::once("n".to_string())
        .chain((1..=width).map(|i| format!("p{i}")))
        .collect();
    w.write_record(&header).map_err(csv_err)?;
    for s in &record.steps {
        let row: Vec<String> = std::iter::once(s.n.to_string())
            .chain(s.probs_after.as_slice().iter().map(f64::to_string))
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()
}

pub fn read_probs_csv(path: &Path) -> io::Result<Vec<ProbsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let bad =
            |e: &dyn std::fmt::Display| io::Error::new(io::ErrorKind::InvalidData, e.to_string());
        let n = rec.get(0).unwrap_or("").parse().map_err(|e| bad(&e))?;
        let probs = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|e| bad(&e)))
            .collect::<io::Result<Vec<_>>>()?;
        rows.push(ProbsRow { n, probs });
    }
    Ok(rows)
}

/// Static SVG: workspace outline, obstacles, goal disc of radius equal to
/// the tolerance, start marker and the trajectory polyline. The y axis
/// points up.
pub fn render_svg(record: &RunRecord) -> String {
    let b = record.world.bounds;
    let margin = 0.05 * b.width().max(b.height());
    let (vx, vy) = (b.min.x - margin, b.min.y - margin);
    let (vw, vh) = (b.width() + 2.0 * margin, b.height() + 2.0 * margin);
    let flip = b.min.y + b.max.y;
    let marker = 0.01 * b.width().max(b.height());

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="600" height="{}" viewBox="{vx} {vy} {vw} {vh}">"#,
        (600.0 * vh / vw).round()
    );
    let _ = writeln!(
        s,
        "<title>seed {} - {} after {} steps</title>",
        record.seed,
        match record.terminated {
            Termination::GoalReached => "goal reached",
            Termination::MaxStepsExceeded => "step budget exhausted",
        },
        record.total_steps
    );
    let _ = writeln!(s, r#"<g transform="translate(0 {flip}) scale(1 -1)">"#);
    let _ = writeln!(
        s,
        r##"<rect class="bounds" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#999999" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
        b.min.x,
        b.min.y,
        b.width(),
        b.height()
    );
    for o in &record.world.obstacles {
        match *o {
            Obstacle::Circle { center, radius } => {
                let _ = writeln!(
                    s,
                    r##"<circle class="obstacle" cx="{}" cy="{}" r="{radius}" fill="#dddddd" stroke="#333333" stroke-width="1.5" vector-effect="non-scaling-stroke"/>"##,
                    center.x, center.y
                );
            }
            Obstacle::Rect { min, max } => {
                let _ = writeln!(
                    s,
                    r##"<rect class="obstacle" x="{}" y="{}" width="{}" height="{}" fill="#dddddd" stroke="#333333" stroke-width="1.5" vector-effect="non-scaling-stroke"/>"##,
                    min.x,
                    min.y,
                    max.x - min.x,
                    max.y - min.y
                );
            }
        }
    }
    let g = record.world.goal;
    let _ = writeln!(
        s,
        r##"<circle class="goal" cx="{}" cy="{}" r="{}" fill="none" stroke="#2e8b57" stroke-width="1.5" vector-effect="non-scaling-stroke"/>"##,
        g.x, g.y, record.world.goal_tolerance
    );
    if !record.steps.is_empty() {
        let mut points = format!("{},{}", record.start.x, record.start.y);
        for step in &record.steps {
            let _ = write!(points, " {},{}", step.pose_after.x, step.pose_after.y);
        }
        let _ = writeln!(
            s,
            r##"<polyline class="trajectory" points="{points}" fill="none" stroke="#1f77b4" stroke-width="1" vector-effect="non-scaling-stroke"/>"##
        );
    }
    let _ = writeln!(
        s,
        r##"<circle class="start" cx="{}" cy="{}" r="{marker}" fill="#d62728"/>"##,
        record.start.x, record.start.y
    );
    s.push_str("</g>\n</svg>\n");
    s
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}

/// Write all four files for one run into `out_dir`, creating it if needed.
pub fn emit_artifacts(
    record: &RunRecord,
    config: &ExperimentConfig,
    out_dir: &Path,
) -> io::Result<RunArtifacts> {
    fs::create_dir_all(out_dir)?;
    let arts = RunArtifacts {
        trajectory_csv: out_dir.join(TRAJECTORY_FILE),
        probs_csv: out_dir.join(PROBS_FILE),
        summary_json: out_dir.join(SUMMARY_FILE),
        plot_svg: out_dir.join(PLOT_FILE),
    };
    write_trajectory_csv(record, BufWriter::new(File::create(&arts.trajectory_csv)?))?;
    write_probs_csv(record, BufWriter::new(File::create(&arts.probs_csv)?))?;
    write_json(&arts.summary_json, &RunSummary::new(record, config))?;
    fs::write(&arts.plot_svg, render_svg(record))?;
    Ok(arts)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchRunLine {
    pub seed: u64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_steps: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchSummaryFile {
    pub summary: BatchSummary,
    pub config: serde_json::Value,
    pub runs: Vec<BatchRunLine>,
}

pub fn write_batch_summary(
    batch: &BatchResult,
    template: &ExperimentConfig,
    out_dir: &Path,
) -> io::Result<PathBuf> {
    use crate::runner::BatchEntry;
    fs::create_dir_all(out_dir)?;
    let mut config = serde_json::to_value(template).expect("config serializes");
    if let Some(map) = config.as_object_mut() {
        map.remove("seed");
    }
    let runs = batch
        .entries
        .iter()
        .map(|e| match e {
            BatchEntry::Completed(r) => BatchRunLine {
                seed: r.seed,
                status: "completed".into(),
                termination: Some(r.terminated),
                total_steps: Some(r.total_steps),
                error: None,
            },
            BatchEntry::ConfigFailure { seed, error } => BatchRunLine {
                seed: *seed,
                status: "config_failure".into(),
                termination: None,
                total_steps: None,
                error: Some(error.clone()),
            },
        })
        .collect();
    let path = out_dir.join(BATCH_SUMMARY_FILE);
    write_json(
        &path,
        &BatchSummaryFile {
            summary: batch.summary.clone(),
            config,
            runs,
        },
    )?;
    Ok(path)
}
