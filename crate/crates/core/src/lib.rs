//! Learning-automaton goal seeking for a simulated differential-drive robot.
//!
//! A six-action automaton picks wheel commands for a two-wheeled robot,
//! is rewarded when the robot gets closer to a goal and penalised
//! otherwise, and learns its way there.
//!
//! * [`automata`]: probability vector, reinforcement updates, roulette selection
//! * [`kinematics`]: differential-drive model and RK4 integration
//! * [`world`]: goal, obstacles, bounds, distance feedback
//! * [`runner`]: episodes, seeded batches, the four reference presets
//! * [`config`] / [`artifacts`]: JSON configs in, CSV/JSON/SVG out

pub mod artifacts;
pub mod automata;
pub mod config;
pub mod error;
pub mod kinematics;
pub mod runner;
pub mod world;

pub use error::{Error, Result};
