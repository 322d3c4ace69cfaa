//! PD tracking controllers for agents (polyline paths with collision stops)
//! and subjects (spline trajectories).

use crate::geometry::Vec2;
use crate::navigation::collision::CollisionAssessment;
use crate::navigation::path::PlannedPath;
use crate::navigation::spline::SplineTrajectory;
use crate::world::BodyState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub kp: f64,
    pub kd: f64,
}

/// How the reference speed is brought down ahead of a stop point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopProfile {
    /// Distance over which the reference speed ramps linearly to zero.
    pub ramp: f64,
    /// The ramp reaches zero this far before the stop arclength.
    pub standoff: f64,
}

impl Default for StopProfile {
    fn default() -> Self {
        Self {
            ramp: 1.0,
            standoff: 0.1,
        }
    }
}

fn ramp_speed(speed: f64, remaining: f64, ramp: f64) -> f64 {
    speed * (remaining / ramp).clamp(0.0, 1.0)
}

/// Reference speed along the path at `progress`: target speed, ramped down
/// ahead of the path end and ahead of an imminent-collision stop point.
pub fn reference_speed(
    path: &PlannedPath,
    progress: f64,
    assessment: &CollisionAssessment,
    profile: StopProfile,
) -> f64 {
    let mut speed = ramp_speed(path.target_speed, path.total_length - progress, profile.ramp);
    if assessment.imminent {
        let remaining = assessment.stop_arclength - profile.standoff - progress;
        speed = speed.min(ramp_speed(path.target_speed, remaining, profile.ramp));
    }
    speed
}

fn pd(state: &BodyState, p_ref: Vec2, v_ref: Vec2, gains: Gains, a_max: f64) -> Vec2 {
    let a = (p_ref - state.position) * gains.kp + (v_ref - state.velocity) * gains.kd;
    a.clamp_norm(a_max)
}

/// Agent acceleration command at path arclength `progress`.
pub fn agent_control(
    state: &BodyState,
    path: &PlannedPath,
    progress: f64,
    assessment: &CollisionAssessment,
    gains: Gains,
    a_max: f64,
    profile: StopProfile,
) -> Vec2 {
    let p_ref = path.point_at(progress);
    let v_ref = path.tangent_at(progress) * reference_speed(path, progress, assessment, profile);
    pd(state, p_ref, v_ref, gains, a_max)
}

/// Subject acceleration command tracking the reference that has travelled
/// `reference_arclength` along `traj`. Subjects never avoid anything.
pub fn subject_control(
    state: &BodyState,
    traj: &SplineTrajectory,
    reference_arclength: f64,
    gains: Gains,
    a_max: f64,
) -> Vec2 {
    let s = reference_arclength.min(traj.length());
    let p_ref = traj.point_at(s);
    let v_ref = if s < traj.length() {
        traj.tangent_at(s) * traj.target_speed
    } else {
        Vec2::ZERO
    };
    pd(state, p_ref, v_ref, gains, a_max)
}
