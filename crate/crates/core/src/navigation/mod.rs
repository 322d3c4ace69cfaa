//! Agent planning and control, and subject trajectory generation.

pub mod collision;
pub mod control;
pub mod path;
pub mod spline;

pub use collision::{assess_collision, BeliefSamples, CollisionAssessment, CollisionParams};
pub use control::{agent_control, reference_speed, subject_control, Gains, StopProfile};
pub use path::{plan_path, PlannedPath};
pub use spline::{generate_subject_trajectory, SplineTrajectory};
