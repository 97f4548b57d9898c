//! JSON run configuration.
//!
//! A config file is a sparse override document applied on top of a preset:
//!
//! ```json
//! {
//!   "preset": 4,
//!   "seed": 42,
//!   "scheme": {"a": 0.7, "b": 0.7, "kind": "lrp"},
//!   "robot": {"c": 2.8, "b": 12, "omega": 2, "T": 0.5, "substeps": 10},
//!   "world": {
//!     "random_goal": {"min_start_distance": 20},
//!     "tolerance": 2,
//!     "bounds": {"min": [-100, -100], "max": [100, 100]},
//!     "obstacles": [{"circle": {"center": [10, 20], "radius": 5}}]
//!   },
//!   "max_steps": 5000,
//!   "feedback_literal_eq10": false
//! }
//! ```
//!
//! Every key is optional. `world.goal: [x, y]` fixes the goal instead of
//! sampling it, and `world.obstacles_on_path: {radius, offset, clearance}`
//! selects the goal-relative layout used by preset 4. Unknown keys are
//! rejected. When `scheme.kind` is omitted it is inferred from `a` and `b`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::automata::{LearningScheme, SchemeKind};
use crate::error::Error;
use crate::runner::{
    preset, ExperimentConfig, GoalSpec, ObstacleSpec, OnPathLayout, DEFAULT_MIN_START_DISTANCE,
};
use crate::world::{Bounds, Obstacle, Point};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid `{field}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Validation {
        field: String,
        line: Option<usize>,
        message: String,
    },
}

impl ConfigError {
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Validation { field, .. } => Some(field),
            _ => None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    preset: Option<u8>,
    seed: Option<u64>,
    scheme: Option<SchemeOverride>,
    robot: Option<RobotOverride>,
    world: Option<WorldOverride>,
    max_steps: Option<u32>,
    feedback_literal_eq10: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeOverride {
    a: Option<f64>,
    b: Option<f64>,
    kind: Option<SchemeKind>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotOverride {
    c: Option<f64>,
    b: Option<f64>,
    omega: Option<f64>,
    #[serde(rename = "T")]
    t: Option<f64>,
    substeps: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldOverride {
    goal: Option<Point>,
    random_goal: Option<RandomGoalOverride>,
    tolerance: Option<f64>,
    bounds: Option<Bounds>,
    obstacles: Option<Vec<Obstacle>>,
    obstacles_on_path: Option<OnPathOverride>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomGoalOverride {
    min_start_distance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OnPathOverride {
    radius: Option<f64>,
    offset: Option<f64>,
    clearance: Option<f64>,
}

/// Command-line values applied after the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<u8>,
    pub seed: Option<u64>,
    /// Seed used when neither the command line nor the file gives one.
    pub seed_fallback: Option<u64>,
    pub max_steps: Option<u32>,
    /// Only ever switches the literal rule on.
    pub literal_eq10: bool,
}

/// Parse a config file and apply `overrides`.
pub fn parse_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, overrides)
}

/// Parse inline JSON config text and apply `overrides`.
pub fn parse_config_str(
    text: &str,
    overrides: &Overrides,
) -> Result<ExperimentConfig, ConfigError> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Resolver { text }.resolve(file, overrides)
}

/// Config built from presets and command-line values alone.
pub fn config_from_overrides(overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    Resolver { text: "" }.resolve(ConfigFile::default(), overrides)
}

struct Resolver<'a> {
    text: &'a str,
}

impl Resolver<'_> {
    fn invalid(&self, path: &[&str], message: impl Into<String>) -> ConfigError {
        ConfigError::Validation {
            field: path.join("."),
            line: key_line(self.text, path),
            message: message.into(),
        }
    }

    fn wrap(&self, prefix: &str, err: Error) -> ConfigError {
        match err {
            Error::InvalidParameter {
                name,
                value,
                reason,
            } => {
                let field = name.strip_prefix(&format!("{prefix}.")).unwrap_or(name);
                self.invalid(&[prefix, field], format!("{value} {reason}"))
            }
            other => self.invalid(&[prefix], other.to_string()),
        }
    }

    fn resolve(&self, file: ConfigFile, ov: &Overrides) -> Result<ExperimentConfig, ConfigError> {
        let preset_id = ov.preset.or(file.preset);
        let mut cfg =
            preset(preset_id.unwrap_or(1)).map_err(|e| self.invalid(&["preset"], e.to_string()))?;
        cfg.preset = preset_id;

        if let Some(seed) = ov.seed.or(file.seed).or(ov.seed_fallback) {
            cfg.seed = seed;
        }
        if let Some(s) = file.scheme {
            let a = s.a.unwrap_or(cfg.scheme.a());
            let b = s.b.unwrap_or(cfg.scheme.b());
            let kind = match s.kind {
                Some(kind) => kind,
                None if s.a.is_some() || s.b.is_some() => SchemeKind::infer(a, b),
                None => cfg.scheme.kind(),
            };
            cfg.scheme = LearningScheme::new(kind, a, b).map_err(|e| self.wrap("scheme", e))?;
        }
        if let Some(r) = file.robot {
            let robot = &mut cfg.robot;
            robot.wheel_radius = r.c.unwrap_or(robot.wheel_radius);
            robot.shaft_length = r.b.unwrap_or(robot.shaft_length);
            robot.wheel_speed = r.omega.unwrap_or(robot.wheel_speed);
            robot.action_duration = r.t.unwrap_or(robot.action_duration);
            robot.substeps = r.substeps.unwrap_or(robot.substeps);
        }
        cfg.robot.validate().map_err(|e| self.wrap("robot", e))?;
        if let Some(w) = file.world {
            self.apply_world(&mut cfg, w)?;
        }
        if let Some(m) = file.max_steps {
            cfg.max_steps = m;
        }
        if let Some(l) = file.feedback_literal_eq10 {
            cfg.feedback_literal_eq10 = l;
        }

        if let Some(m) = ov.max_steps {
            cfg.max_steps = m;
        }
        if ov.literal_eq10 {
            cfg.feedback_literal_eq10 = true;
        }
        if cfg.max_steps == 0 {
            return Err(self.invalid(&["max_steps"], "must be at least 1"));
        }
        if !cfg.scheme.kind().is_p_model() {
            return Err(self.invalid(
                &["scheme", "kind"],
                "the navigation environment gives binary feedback; choose a P-model scheme",
            ));
        }
        Ok(cfg)
    }

    fn apply_world(&self, cfg: &mut ExperimentConfig, w: WorldOverride) -> Result<(), ConfigError> {
        let world = &mut cfg.world;
        match (w.goal, w.random_goal) {
            (Some(_), Some(_)) => {
                return Err(self.invalid(
                    &["world", "goal"],
                    "give either `goal` or `random_goal`, not both",
                ))
            }
            (Some(goal), None) => world.goal = GoalSpec::Fixed(goal),
            (None, Some(r)) => {
                let min_start_distance = r.min_start_distance.unwrap_or(DEFAULT_MIN_START_DISTANCE);
                if !(min_start_distance.is_finite() && min_start_distance >= 0.0) {
                    return Err(self.invalid(
                        &["world", "random_goal", "min_start_distance"],
                        "must be a non-negative number",
                    ));
                }
                world.goal = GoalSpec::RandomGoal { min_start_distance };
            }
            (None, None) => {}
        }
        if let Some(t) = w.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(self.invalid(&["world", "tolerance"], format!("{t} must be positive")));
            }
            world.tolerance = t;
        }
        if let Some(bounds) = w.bounds {
            bounds
                .validate()
                .map_err(|e| self.invalid(&["world", "bounds"], e.to_string()))?;
            world.bounds = bounds;
        }
        match (w.obstacles, w.obstacles_on_path) {
            (Some(_), Some(_)) => {
                return Err(self.invalid(
                    &["world", "obstacles"],
                    "give either `obstacles` or `obstacles_on_path`, not both",
                ))
            }
            (Some(list), None) => {
                for (i, o) in list.iter().enumerate() {
                    o.validate().map_err(|e| {
                        self.invalid(&["world", "obstacles"], format!("entry {i}: {e}"))
                    })?;
                }
                world.obstacles = ObstacleSpec::Fixed(list);
            }
            (None, Some(o)) => {
                let base = match &world.obstacles {
                    ObstacleSpec::OnPath(layout) => *layout,
                    ObstacleSpec::Fixed(_) => OnPathLayout::default(),
                };
                let layout = OnPathLayout {
                    radius: o.radius.unwrap_or(base.radius),
                    offset: o.offset.unwrap_or(base.offset),
                    clearance: o.clearance.unwrap_or(base.clearance),
                };
                layout
                    .validate()
                    .map_err(|e| self.invalid(&["world", "obstacles_on_path"], e.to_string()))?;
                world.obstacles = ObstacleSpec::OnPath(layout);
            }
            (None, None) => {}
        }
        if let GoalSpec::Fixed(goal) = world.goal {
            if !world.bounds.contains(&goal) {
                return Err(self.invalid(&["world", "goal"], "goal lies outside the bounds"));
            }
        }
        Ok(())
    }
}

/// 1-based line of the key path in `text`, found by successive key search.
fn key_line(text: &str, path: &[&str]) -> Option<usize> {
    let mut pos = 0;
    let mut found = false;
    for key in path {
        let needle = format!("\"{key}\"");
        match text[pos..].find(&needle) {
            Some(off) => {
                pos += off;
                found = true;
            }
            None => break,
        }
    }
    found.then(|| text[..pos].matches('\n').count() + 1)
}
