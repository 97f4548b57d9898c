//! Episode loop, seeded batches and the four reference experiments.
//!
//! One episode: start at the origin facing +y with a uniform distribution
//! over the six actions, then repeat
//! select → drive → collide → score → learn
//! until the goal is within tolerance or the step budget runs out.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::automata::{
    apply_feedback, init_uniform, select_action, LearningScheme, PFlag, ProbabilityVector,
};
use crate::error::{Error, Result};
use crate::kinematics::{integrate_action, Action, RobotParams, RobotPose};
use crate::world::{
    compute_feedback_with, distance_to_goal, goal_reached, random_goal_where, resolve_motion,
    Bounds, FeedbackRule, Obstacle, Point, World, DEFAULT_GOAL_TOLERANCE,
};

/// Generator used for every random draw; recorded in run metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng/rand_chacha-0.3/seed_from_u64; stream 0 goal, stream 1 action draws";

const GOAL_STREAM: u64 = 0;
const ACTION_STREAM: u64 = 1;

pub const DEFAULT_MAX_STEPS: u32 = 5000;
pub const DEFAULT_MIN_START_DISTANCE: f64 = 20.0;

/// Where the goal comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalSpec {
    #[serde(rename = "goal")]
    Fixed(Point),
    RandomGoal {
        min_start_distance: f64,
    },
}

/// Obstacles placed across the straight start-to-goal line: two circles at
/// 1/3 and 2/3 of the way, pushed `offset` to either side of the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnPathLayout {
    pub radius: f64,
    pub offset: f64,
    /// Minimum gap between any obstacle and both the start and the goal.
    pub clearance: f64,
}

impl Default for OnPathLayout {
    fn default() -> Self {
        Self {
            radius: 10.0,
            offset: 5.0,
            clearance: 2.0,
        }
    }
}

impl OnPathLayout {
    pub fn place(&self, start: Point, goal: Point) -> Vec<Obstacle> {
        let (dx, dy) = (goal.x - start.x, goal.y - start.y);
        let len = dx.hypot(dy);
        let (nx, ny) = if len > 0.0 {
            (-dy / len, dx / len)
        } else {
            (1.0, 0.0)
        };
        [(1.0 / 3.0, 1.0), (2.0 / 3.0, -1.0)]
            .iter()
            .map(|&(t, side)| {
                let on_line = start.lerp(&goal, t);
                Obstacle::Circle {
                    center: Point::new(
                        on_line.x + side * self.offset * nx,
                        on_line.y + side * self.offset * ny,
                    ),
                    radius: self.radius,
                }
            })
            .collect()
    }

    /// True when the placed obstacles keep `clearance` from start and goal.
    pub fn admits(&self, start: Point, goal: Point) -> bool {
        self.place(start, goal).iter().all(|o| match o {
            Obstacle::Circle { center, radius } => {
                center.distance(&start) >= radius + self.clearance
                    && center.distance(&goal) >= radius + self.clearance
            }
            Obstacle::Rect { .. } => unreachable!(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidParameter {
                name: "world.obstacles_on_path.radius",
                value: self.radius,
                reason: "must be positive",
            });
        }
        if !(self.offset.is_finite() && self.clearance.is_finite() && self.clearance >= 0.0) {
            return Err(Error::Config(
                "obstacles_on_path offset/clearance must be finite, clearance >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleSpec {
    #[serde(rename = "obstacles")]
    Fixed(Vec<Obstacle>),
    #[serde(rename = "obstacles_on_path")]
    OnPath(OnPathLayout),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorldSpec {
    #[serde(flatten)]
    pub goal: GoalSpec,
    pub tolerance: f64,
    pub bounds: Bounds,
    #[serde(flatten)]
    pub obstacles: ObstacleSpec,
}

impl Default for WorldSpec {
    fn default() -> Self {
        Self {
            goal: GoalSpec::RandomGoal {
                min_start_distance: DEFAULT_MIN_START_DISTANCE,
            },
            tolerance: DEFAULT_GOAL_TOLERANCE,
            bounds: Bounds::default(),
            obstacles: ObstacleSpec::Fixed(Vec::new()),
        }
    }
}

impl WorldSpec {
    /// Resolve goal and obstacles for one seed. The goal uses its own
    /// generator stream so every preset sees the same goal for a seed.
    pub fn realize(&self, seed: u64, start: Point) -> Result<World> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(GOAL_STREAM);
        self.realize_with(&mut rng, start)
    }

    fn realize_with<R: Rng + ?Sized>(&self, rng: &mut R, start: Point) -> Result<World> {
        if let ObstacleSpec::OnPath(layout) = &self.obstacles {
            layout.validate()?;
        }
        let goal = match (&self.goal, &self.obstacles) {
            (GoalSpec::Fixed(p), _) => *p,
            (GoalSpec::RandomGoal { min_start_distance }, ObstacleSpec::Fixed(obs)) => {
                random_goal_where(&self.bounds, rng, |p| {
                    p.distance(&start) >= *min_start_distance && !obs.iter().any(|o| o.contains(p))
                })?
            }
            (GoalSpec::RandomGoal { min_start_distance }, ObstacleSpec::OnPath(layout)) => {
                random_goal_where(&self.bounds, rng, |p| {
                    p.distance(&start) >= *min_start_distance && layout.admits(start, *p)
                })?
            }
        };
        let obstacles = match &self.obstacles {
            ObstacleSpec::Fixed(obs) => obs.clone(),
            ObstacleSpec::OnPath(layout) => layout.place(start, goal),
        };
        let world = World::new(goal, self.tolerance, obstacles, self.bounds)?;
        if world.in_obstacle(&start) {
            return Err(Error::InfeasibleWorld(
                "start lies inside an obstacle".into(),
            ));
        }
        if !world.bounds.contains(&start) {
            return Err(Error::InfeasibleWorld(
                "start lies outside the bounds".into(),
            ));
        }
        Ok(world)
    }
}

/// Everything that determines an episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<u8>,
    pub seed: u64,
    pub scheme: LearningScheme,
    pub robot: RobotParams,
    pub world: WorldSpec,
    pub max_steps: u32,
    pub feedback_literal_eq10: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        preset(1).expect("preset 1 is valid")
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "max_steps",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if !self.scheme.kind().is_p_model() {
            return Err(Error::Config(
                "the navigation environment only produces binary feedback; use a P-model scheme"
                    .into(),
            ));
        }
        self.robot.validate()?;
        self.world.bounds.validate()?;
        if !(self.world.tolerance.is_finite() && self.world.tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "world.tolerance",
                value: self.world.tolerance,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn feedback_rule(&self) -> FeedbackRule {
        FeedbackRule::from_literal_flag(self.feedback_literal_eq10)
    }

    /// SHA-256 over the canonical JSON of everything except the seed.
    pub fn digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("seed");
        }
        let canonical = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Short description of a preset for listings.
#[derive(Debug, Clone, Serialize)]
pub struct PresetInfo {
    pub id: u8,
    pub name: &'static str,
    pub a: f64,
    pub b: f64,
    pub kind: String,
    pub obstacles: &'static str,
}

pub const PRESET_IDS: [u8; 4] = [1, 2, 3, 4];

/// The four reference experiments:
/// 1. reward-penalty `a = b = 0.7`;
/// 2. reward-inaction `a = 0.7, b = 0`;
/// 3. penalty only `a = 0, b = 0.7`;
/// 4. as 1, with two circular obstacles across the direct path.
pub fn preset(id: u8) -> Result<ExperimentConfig> {
    let scheme = match id {
        1 | 4 => LearningScheme::reward_penalty(0.7)?,
        2 => LearningScheme::reward_inaction(0.7)?,
        3 => LearningScheme::penalty_only(0.7)?,
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other} (expected 1..=4)"
            )))
        }
    };
    let mut world = WorldSpec::default();
    if id == 4 {
        world.obstacles = ObstacleSpec::OnPath(OnPathLayout::default());
    }
    Ok(ExperimentConfig {
        preset: Some(id),
        seed: 1,
        scheme,
        robot: RobotParams::default(),
        world,
        max_steps: DEFAULT_MAX_STEPS,
        feedback_literal_eq10: false,
    })
}

pub fn preset_info(id: u8) -> Result<PresetInfo> {
    let cfg = preset(id)?;
    let name = match id {
        1 => "reward-penalty",
        2 => "reward-inaction",
        3 => "penalty-only",
        _ => "reward-penalty with obstacles",
    };
    Ok(PresetInfo {
        id,
        name,
        a: cfg.scheme.a(),
        b: cfg.scheme.b(),
        kind: cfg.scheme.kind().to_string(),
        obstacles: if id == 4 {
            "two r=10 cm circles at 1/3 and 2/3 of the start-goal line, offset ±5 cm"
        } else {
            "none"
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GoalReached,
    MaxStepsExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step number.
    pub n: u32,
    pub pose_before: RobotPose,
    pub pose_after: RobotPose,
    pub action: Action,
    pub z_draw: f64,
    pub flag: PFlag,
    pub d_before: f64,
    pub d_after: f64,
    pub probs_after: ProbabilityVector,
    pub blocked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub config_digest: String,
    pub rng_algorithm: String,
    pub world: World,
    pub start: RobotPose,
    pub terminated: Termination,
    pub total_steps: u32,
    pub steps: Vec<StepRecord>,
}

impl RunRecord {
    pub fn final_pose(&self) -> RobotPose {
        self.steps.last().map_or(self.start, |s| s.pose_after)
    }

    pub fn reached_goal(&self) -> bool {
        self.terminated == Termination::GoalReached
    }

    /// Distribution in force before step `i` (0-based into `steps`).
    pub fn probs_before(&self, i: usize) -> ProbabilityVector {
        match i {
            0 => init_uniform(Action::COUNT).expect("six actions"),
            _ => self.steps[i - 1].probs_after.clone(),
        }
    }
}

pub fn run_episode(config: &ExperimentConfig) -> Result<RunRecord> {
    config.validate()?;
    let start = RobotPose::ORIGIN;
    let world = config.world.realize(config.seed, Point::from(&start))?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(ACTION_STREAM);
    let rule = config.feedback_rule();

    let mut probs = init_uniform(Action::COUNT)?;
    let mut pose = start;
    let mut d_prev = distance_to_goal(&pose, &world);
    let mut steps = Vec::new();
    let mut terminated = Termination::MaxStepsExceeded;

    if goal_reached(&pose, &world) {
        terminated = Termination::GoalReached;
    } else {
        for n in 1..=config.max_steps {
            let z: f64 = rng.gen();
            let action = Action::from_index(select_action(&probs, z)?)?;
            let proposed = integrate_action(&pose, action, &config.robot);
            let (after, blocked) = resolve_motion(&pose, &proposed, &world)?;
            let d_after = distance_to_goal(&after, &world);
            let feedback = compute_feedback_with(d_after, d_prev, rule)?;
            probs = apply_feedback(&probs, action.index(), &feedback, &config.scheme)?;
            steps.push(StepRecord {
                n,
                pose_before: pose,
                pose_after: after,
                action,
                z_draw: z,
                flag: feedback.flag().expect("distance feedback is binary"),
                d_before: d_prev,
                d_after,
                probs_after: probs.clone(),
                blocked,
            });
            pose = after;
            d_prev = d_after;
            if goal_reached(&pose, &world) {
                terminated = Termination::GoalReached;
                break;
            }
        }
    }

    Ok(RunRecord {
        seed: config.seed,
        config_digest: config.digest(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        world,
        start,
        terminated,
        total_steps: steps.len() as u32,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum BatchEntry {
    Completed(RunRecord),
    ConfigFailure { seed: u64, error: String },
}

impl BatchEntry {
    pub fn seed(&self) -> u64 {
        match self {
            BatchEntry::Completed(r) => r.seed,
            BatchEntry::ConfigFailure { seed, .. } => *seed,
        }
    }

    pub fn record(&self) -> Option<&RunRecord> {
        match self {
            BatchEntry::Completed(r) => Some(r),
            BatchEntry::ConfigFailure { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub mean: f64,
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
    pub min: u32,
    pub max: u32,
}

impl StepStats {
    /// `None` for an empty sample.
    pub fn from_counts(counts: &[u32]) -> Option<Self> {
        if counts.is_empty() {
            return None;
        }
        let mut sorted = counts.to_vec();
        sorted.sort_unstable();
        let mean = sorted.iter().map(|&c| c as f64).sum::<f64>() / sorted.len() as f64;
        Some(Self {
            mean,
            median: quantile(&sorted, 0.5),
            p10: quantile(&sorted, 0.1),
            p90: quantile(&sorted, 0.9),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Linear interpolation between closest ranks on sorted data.
fn quantile(sorted: &[u32], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] as f64 + frac * (sorted[hi] as f64 - sorted[lo] as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub config_digest: String,
    pub runs: usize,
    pub completed: usize,
    pub config_failures: usize,
    pub goal_reached: usize,
    /// Goal-reaching runs over all requested seeds.
    pub success_rate: f64,
    /// Step counts of completed runs; capped runs count as `max_steps`.
    pub steps: Option<StepStats>,
    /// Step counts of goal-reaching runs only.
    pub steps_to_goal: Option<StepStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchResult {
    pub entries: Vec<BatchEntry>,
    pub summary: BatchSummary,
}

impl BatchResult {
    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.entries.iter().filter_map(BatchEntry::record)
    }
}

impl BatchSummary {
    pub fn from_entries(config_digest: String, entries: &[BatchEntry]) -> Self {
        let records: Vec<&RunRecord> = entries.iter().filter_map(BatchEntry::record).collect();
        let all: Vec<u32> = records.iter().map(|r| r.total_steps).collect();
        let reached: Vec<u32> = records
            .iter()
            .filter(|r| r.reached_goal())
            .map(|r| r.total_steps)
            .collect();
        Self {
            config_digest,
            runs: entries.len(),
            completed: records.len(),
            config_failures: entries.len() - records.len(),
            goal_reached: reached.len(),
            success_rate: reached.len() as f64 / entries.len().max(1) as f64,
            steps: StepStats::from_counts(&all),
            steps_to_goal: StepStats::from_counts(&reached),
        }
    }
}

/// Run the template once per seed on `parallelism` worker threads.
/// Entries come back in the order of `seeds`.
pub fn run_batch(
    template: &ExperimentConfig,
    seeds: &[u64],
    parallelism: usize,
) -> Result<BatchResult> {
    if seeds.is_empty() {
        return Err(Error::Config("empty seed list".into()));
    }
    if parallelism == 0 {
        return Err(Error::Config("parallelism must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let entries: Vec<BatchEntry> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| match run_episode(&template.with_seed(seed)) {
                Ok(record) => BatchEntry::Completed(record),
                Err(e) => BatchEntry::ConfigFailure {
                    seed,
                    error: e.to_string(),
                },
            })
            .collect()
    });
    let summary = BatchSummary::from_entries(template.digest(), &entries);
    Ok(BatchResult { entries, summary })
}
