//! The robot's environment: goal, workspace bounds and obstacles, plus the
//! distance-based success/failure signal.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::automata::{Feedback, PFlag};
use crate::error::{Error, Result};
use crate::kinematics::RobotPose;

/// Interior points sampled along a motion segment for collision checks.
pub const COLLISION_SAMPLES: usize = 32;

/// Consecutive rejections after which goal sampling gives up.
pub const MAX_GOAL_REJECTIONS: usize = 10_000;

pub const DEFAULT_GOAL_TOLERANCE: f64 = 2.0;

/// A point in the plane, serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl From<&RobotPose> for Point {
    fn from(pose: &RobotPose) -> Self {
        Point::new(pose.x, pose.y)
    }
}

/// Axis-aligned workspace rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            min: Point::new(-100.0, -100.0),
            max: Point::new(100.0, 100.0),
        }
    }
}

impl Bounds {
    pub fn new(min: Point, max: Point) -> Result<Self> {
        let b = Self { min, max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.min.x, self.min.y, self.max.x, self.max.y]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.min.x >= self.max.x || self.min.y >= self.max.y {
            return Err(Error::Config(format!(
                "degenerate bounds {:?}..{:?}",
                <[f64; 2]>::from(self.min),
                <[f64; 2]>::from(self.max)
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: &Point) -> bool {
        (self.min.x..=self.max.x).contains(&p.x) && (self.min.y..=self.max.y).contains(&p.y)
    }

    pub fn center(&self) -> Point {
        self.min.lerp(&self.max, 0.5)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// Region the robot may not enter. Boundaries count as inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Obstacle {
    Circle { center: Point, radius: f64 },
    Rect { min: Point, max: Point },
}

impl Obstacle {
    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        let o = Obstacle::Circle { center, radius };
        o.validate()?;
        Ok(o)
    }

    pub fn rect(min: Point, max: Point) -> Result<Self> {
        let o = Obstacle::Rect { min, max };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Obstacle::Circle { center, radius } => {
                if !(radius.is_finite()
                    && radius > 0.0
                    && center.x.is_finite()
                    && center.y.is_finite())
                {
                    return Err(Error::Config(format!(
                        "circle obstacle with radius {radius}"
                    )));
                }
            }
            Obstacle::Rect { min, max } => Bounds { min, max }.validate().map_err(|_| {
                Error::Config("rect obstacle must have min < max on both axes".into())
            })?,
        }
        Ok(())
    }

    pub fn contains(&self, p: &Point) -> bool {
        match *self {
            Obstacle::Circle { center, radius } => center.distance(p) <= radius,
            Obstacle::Rect { min, max } => Bounds { min, max }.contains(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub goal: Point,
    pub goal_tolerance: f64,
    pub obstacles: Vec<Obstacle>,
    pub bounds: Bounds,
}

impl World {
    pub fn new(
        goal: Point,
        goal_tolerance: f64,
        obstacles: Vec<Obstacle>,
        bounds: Bounds,
    ) -> Result<Self> {
        let world = Self {
            goal,
            goal_tolerance,
            obstacles,
            bounds,
        };
        world.validate()?;
        Ok(world)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.goal_tolerance.is_finite() && self.goal_tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "world.tolerance",
                value: self.goal_tolerance,
                reason: "must be positive",
            });
        }
        self.bounds.validate()?;
        for o in &self.obstacles {
            o.validate()?;
        }
        if !self.bounds.contains(&self.goal) {
            return Err(Error::InfeasibleWorld(
                "goal lies outside the bounds".into(),
            ));
        }
        if self.is_blocked(&self.goal) {
            return Err(Error::InfeasibleWorld(
                "goal lies inside an obstacle".into(),
            ));
        }
        Ok(())
    }

    pub fn in_obstacle(&self, p: &Point) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    /// Inside an obstacle or outside the bounds.
    pub fn is_blocked(&self, p: &Point) -> bool {
        !self.bounds.contains(p) || self.in_obstacle(p)
    }
}

/// Uniform goal in `bounds`, outside every obstacle and at least
/// `min_start_distance` from the origin.
pub fn random_goal<R: Rng + ?Sized>(
    bounds: &Bounds,
    obstacles: &[Obstacle],
    rng: &mut R,
    min_start_distance: f64,
) -> Result<Point> {
    random_goal_where(bounds, rng, |p| {
        p.distance(&Point::ORIGIN) >= min_start_distance && !obstacles.iter().any(|o| o.contains(p))
    })
}

/// Rejection-sample a uniform point in `bounds` satisfying `accept`.
pub fn random_goal_where<R, F>(bounds: &Bounds, rng: &mut R, accept: F) -> Result<Point>
where
    R: Rng + ?Sized,
    F: Fn(&Point) -> bool,
{
    bounds.validate()?;
    for _ in 0..MAX_GOAL_REJECTIONS {
        let p = Point::new(
            bounds.min.x + rng.gen::<f64>() * bounds.width(),
            bounds.min.y + rng.gen::<f64>() * bounds.height(),
        );
        if accept(&p) {
            return Ok(p);
        }
    }
    Err(Error::InfeasibleWorld(format!(
        "no admissible goal after {MAX_GOAL_REJECTIONS} samples"
    )))
}

pub fn distance_to_goal(pose: &RobotPose, world: &World) -> f64 {
    Point::from(pose).distance(&world.goal)
}

/// How a distance change is turned into a success/failure flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackRule {
    /// Success iff the distance strictly decreased.
    #[default]
    Progress,
    /// Success iff the distance did not decrease.
    Literal,
}

impl FeedbackRule {
    pub fn from_literal_flag(literal: bool) -> Self {
        if literal {
            FeedbackRule::Literal
        } else {
            FeedbackRule::Progress
        }
    }
}

/// Success when the robot got strictly closer; ties are failures.
pub fn compute_feedback(d_now: f64, d_prev: f64) -> Result<Feedback> {
    compute_feedback_with(d_now, d_prev, FeedbackRule::Progress)
}

pub fn compute_feedback_with(d_now: f64, d_prev: f64, rule: FeedbackRule) -> Result<Feedback> {
    for d in [d_now, d_prev] {
        if d.is_nan() || d < 0.0 {
            return Err(Error::InvalidDistance(d));
        }
    }
    let closer = d_now < d_prev;
    let success = match rule {
        FeedbackRule::Progress => closer,
        FeedbackRule::Literal => !closer,
    };
    Ok(Feedback::PModel(if success {
        PFlag::Success
    } else {
        PFlag::Failure
    }))
}

/// Within tolerance of the goal, boundary included.
pub fn goal_reached(pose: &RobotPose, world: &World) -> bool {
    distance_to_goal(pose, world) <= world.goal_tolerance
}

/// Accept `proposed` if the straight segment from `start` stays inside the
/// bounds and clear of obstacles; otherwise the robot stays at `start`.
/// Returns the resulting pose and whether the move was blocked.
pub fn resolve_motion(
    start: &RobotPose,
    proposed: &RobotPose,
    world: &World,
) -> Result<(RobotPose, bool)> {
    let from = Point::from(start);
    if world.in_obstacle(&from) {
        return Err(Error::InvalidState(format!(
            "start ({}, {}) lies inside an obstacle",
            from.x, from.y
        )));
    }
    let to = Point::from(proposed);
    let n = COLLISION_SAMPLES + 1;
    let hits = (1..=n).any(|i| {
        let t = i as f64 / n as f64;
        let p = if i == n { to } else { from.lerp(&to, t) };
        world.is_blocked(&p)
    });
    if hits {
        Ok((*start, true))
    } else {
        Ok((*proposed, false))
    }
}
