//! Differential-drive kinematics and the six discrete motion actions.
//!
//! Frame convention: with `theta = 0` the robot faces +y, and a positive
//! rate on the right wheel alone turns it counter-clockwise.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar pose of the rear-axle centre. `theta` accumulates without wrapping.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl RobotPose {
    pub const ORIGIN: RobotPose = RobotPose {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    /// Heading wrapped to (−π, π].
    pub fn wrapped_theta(&self) -> f64 {
        let mut t = self.theta.rem_euclid(2.0 * PI);
        if t > PI {
            t -= 2.0 * PI;
        }
        t
    }

    pub fn distance_to(&self, other: &RobotPose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn advance(&self, rate: &PoseRate, h: f64) -> RobotPose {
        RobotPose {
            x: self.x + h * rate.dx,
            y: self.y + h * rate.dy,
            theta: self.theta + h * rate.dtheta,
        }
    }
}

/// Time derivative of a [`RobotPose`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseRate {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

/// Geometry and actuation constants of the robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotParams {
    /// Wheel radius, cm.
    #[serde(rename = "c")]
    pub wheel_radius: f64,
    /// Length of the wheel shaft, cm.
    #[serde(rename = "b")]
    pub shaft_length: f64,
    /// Wheel speed magnitude used for every driven wheel, rad/s.
    #[serde(rename = "omega")]
    pub wheel_speed: f64,
    /// How long one action is applied, s.
    #[serde(rename = "T")]
    pub action_duration: f64,
    /// RK4 steps per action.
    pub substeps: u32,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            wheel_radius: 2.8,
            shaft_length: 12.0,
            wheel_speed: 2.0,
            action_duration: 0.5,
            substeps: 10,
        }
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("robot.c", self.wheel_radius),
            ("robot.b", self.shaft_length),
            ("robot.omega", self.wheel_speed),
            ("robot.T", self.action_duration),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        if self.substeps == 0 {
            return Err(Error::InvalidParameter {
                name: "robot.substeps",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }

    /// Time for a single driven wheel to carry the robot once around its
    /// circle of radius `b/2`.
    pub fn full_turn_duration(&self) -> f64 {
        2.0 * PI * self.shaft_length / (self.wheel_radius * self.wheel_speed)
    }
}

/// Signed wheel rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelSpeeds {
    pub right: f64,
    pub left: f64,
}

/// The six motion primitives, numbered 1–6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Action {
    Forward = 1,
    RightForward = 2,
    LeftForward = 3,
    Backward = 4,
    RightBackward = 5,
    LeftBackward = 6,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::Forward,
        Action::RightForward,
        Action::LeftForward,
        Action::Backward,
        Action::RightBackward,
        Action::LeftBackward,
    ];

    pub const COUNT: usize = 6;

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1..=6 => Ok(Self::ALL[(id - 1) as usize]),
            other => Err(Error::UnknownActionId(other)),
        }
    }

    /// 0-based position, as used by the automaton.
    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL.get(index).copied().ok_or(Error::InvalidAction {
            index,
            count: Self::COUNT,
        })
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Forward => "Forward",
            Action::RightForward => "RightForward",
            Action::LeftForward => "LeftForward",
            Action::Backward => "Backward",
            Action::RightBackward => "RightBackward",
            Action::LeftBackward => "LeftBackward",
        }
    }

    /// Sign pattern `(right, left)` applied to the wheel speed.
    fn wheel_signs(self) -> (f64, f64) {
        match self {
            Action::Forward => (1.0, 1.0),
            Action::RightForward => (0.0, 1.0),
            Action::LeftForward => (1.0, 0.0),
            Action::Backward => (-1.0, -1.0),
            Action::RightBackward => (0.0, -1.0),
            Action::LeftBackward => (-1.0, 0.0),
        }
    }
}

impl TryFrom<u8> for Action {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        Action::from_id(value)
    }
}

impl From<Action> for u8 {
    fn from(value: Action) -> Self {
        value.id()
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn action_to_wheels(action: Action, params: &RobotParams) -> WheelSpeeds {
    let (right, left) = action.wheel_signs();
    WheelSpeeds {
        right: right * params.wheel_speed,
        left: left * params.wheel_speed,
    }
}

/// Same as [`action_to_wheels`] for a raw 1-based id.
pub fn action_id_to_wheels(id: u8, params: &RobotParams) -> Result<WheelSpeeds> {
    Ok(action_to_wheels(Action::from_id(id)?, params))
}

/// Pose rate for given wheel speeds. Both wheels push the robot along its
/// heading by `c/2` each, and their difference spins it at `c/b`.
pub fn pose_derivative(pose: &RobotPose, speeds: WheelSpeeds, params: &RobotParams) -> PoseRate {
    let c = params.wheel_radius;
    let (sin, cos) = pose.theta.sin_cos();
    let sum = speeds.left + speeds.right;
    PoseRate {
        dx: -(c * sin / 2.0) * sum,
        dy: (c * cos / 2.0) * sum,
        dtheta: (c / params.shaft_length) * (speeds.right - speeds.left),
    }
}

/// Fixed-step RK4 over `duration` seconds with `params.substeps` steps.
pub fn integrate_wheels(
    pose: &RobotPose,
    speeds: WheelSpeeds,
    params: &RobotParams,
    duration: f64,
) -> RobotPose {
    let steps = params.substeps.max(1);
    let h = duration / steps as f64;
    let f = |p: &RobotPose| pose_derivative(p, speeds, params);
    let mut state = *pose;
    for _ in 0..steps {
        let k1 = f(&state);
        let k2 = f(&state.advance(&k1, h / 2.0));
        let k3 = f(&state.advance(&k2, h / 2.0));
        let k4 = f(&state.advance(&k3, h));
        state = RobotPose {
            x: state.x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
            y: state.y + h / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
            theta: state.theta
                + h / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta),
        };
    }
    state
}

/// Apply `action` for one action period.
pub fn integrate_action(pose: &RobotPose, action: Action, params: &RobotParams) -> RobotPose {
    integrate_wheels(
        pose,
        action_to_wheels(action, params),
        params,
        params.action_duration,
    )
}
