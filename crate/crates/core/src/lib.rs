//! Navigation among movable obstacles.
//!
//! The crate plans lowest-effort routes through cluttered rooms with a
//! semantic visibility graph (free-space nodes plus mass-weighted passage
//! nodes between close obstacle pairs), tracks them with an MPPI controller
//! whose rollouts run through a deterministic quasi-static pushing
//! simulator, and benchmarks the stack against binary- and
//! no-movability baselines.

pub mod baselines;
pub mod benchmark;
pub mod config;
pub mod geometry;
pub mod mppi;
pub mod physics;
pub mod planner;
pub mod scenario;

pub use geometry::{Point2, Polygon, Pose2};
pub use scenario::{Obstacle, Scenario};
