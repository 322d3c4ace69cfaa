//! Decision-making utility of a potential communication a -> b about h:
//! a weighted sum of the receiver's belief gain (kappa) and the subject's
//! predicted proximity to the receiver (tau).

use crate::geometry::Vec2;
use crate::navigation::PlannedPath;
use crate::perception::{align, fuse, kl_divergence, GaussianBelief, Observation, ProcessNoise};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityParams {
    pub p1: f64,
    pub p2: f64,
    pub horizon: f64,
    /// Distances below this count as contact when computing tau.
    pub proximity_floor: f64,
}

/// KL gain of the receiver's belief if it fused the sender's observation.
/// Neither input is modified.
pub fn kappa(sender_obs: &Observation, receiver_belief: &GaussianBelief, noise: ProcessNoise) -> f64 {
    let (prior, obs) = align(receiver_belief, sender_obs, noise);
    kl_divergence(&fuse(&prior, &obs), &prior)
}

/// Receiver reference positions along its path at target speed, every
/// `sim_dt` over `[0, horizon]`.
pub fn forward_positions(path: &PlannedPath, progress: f64, horizon: f64, sim_dt: f64) -> Vec<Vec2> {
    let steps = (horizon / sim_dt).round() as usize;
    (0..=steps)
        .map(|j| path.point_at(progress + path.target_speed * j as f64 * sim_dt))
        .collect()
}

/// Tau against precomputed receiver positions (see [`forward_positions`]).
pub fn tau_from_positions(
    receiver_positions: &[Vec2],
    subject_belief_of_sender: &GaussianBelief,
    params: &UtilityParams,
    sim_dt: f64,
) -> f64 {
    let p = subject_belief_of_sender.mean.position;
    let v = subject_belief_of_sender.mean.velocity;
    let min_d2 = receiver_positions
        .iter()
        .enumerate()
        .map(|(j, &b)| (p + v * (j as f64 * sim_dt)).distance_squared(b))
        .fold(f64::INFINITY, f64::min);
    let floor2 = params.proximity_floor * params.proximity_floor;
    1.0 / min_d2.max(floor2)
}

/// Inverse squared minimum distance between the receiver following its
/// plan and the subject moving at the sender's believed constant velocity.
pub fn tau(
    receiver_path: &PlannedPath,
    receiver_progress: f64,
    subject_belief_of_sender: &GaussianBelief,
    params: &UtilityParams,
    sim_dt: f64,
) -> f64 {
    let positions = forward_positions(receiver_path, receiver_progress, params.horizon, sim_dt);
    tau_from_positions(&positions, subject_belief_of_sender, params, sim_dt)
}

pub fn utility(kappa_val: f64, tau_val: f64, params: &UtilityParams) -> f64 {
    params.p1 * kappa_val + params.p2 * tau_val
}
