//! Belief-driven collision prediction along an agent's own path.
//!
//! The agent is rolled forward along its path at target speed and each
//! believed subject at its mean velocity. Uncertainty in the subject's
//! position is carried by a fixed set of standardized offsets scaled by the
//! belief's positional standard deviation; each offset yields one
//! distance-to-collision sample.

use crate::geometry::Vec2;
use crate::navigation::path::PlannedPath;
use crate::perception::GaussianBelief;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionAssessment {
    pub imminent: bool,
    /// Arclength along the own path at which to be stopped.
    pub stop_arclength: f64,
    pub mean_distance_to_collision: f64,
    pub distance_std: f64,
}

impl CollisionAssessment {
    pub fn clear() -> Self {
        Self {
            imminent: false,
            stop_arclength: f64::INFINITY,
            mean_distance_to_collision: f64::INFINITY,
            distance_std: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionParams {
    pub horizon: f64,
    pub collision_radius: f64,
    pub sim_dt: f64,
    /// Minimum fraction of colliding samples for a subject to count.
    pub probability_threshold: f64,
}

/// Deterministic standard-normal offsets in the plane.
///
/// Radii follow the Rayleigh quantiles of evenly spaced probabilities and
/// angles advance by the golden angle, so the set is spread evenly over
/// the distribution without random clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefSamples {
    offsets: Vec<Vec2>,
}

impl BeliefSamples {
    pub fn new(count: usize) -> Self {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let offsets = (0..count)
            .map(|k| {
                let u = (k as f64 + 0.5) / count as f64;
                let r = (-2.0 * (1.0 - u).ln()).sqrt();
                let theta = golden * k as f64;
                Vec2::new(r * theta.cos(), r * theta.sin())
            })
            .collect();
        Self { offsets }
    }

    pub fn offsets(&self) -> &[Vec2] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    fn max_radius(&self) -> f64 {
        self.offsets.iter().map(|o| o.norm()).fold(0.0, f64::max)
    }
}

/// First time in [0, 1] at which `r0 + t (r1 - r0)` enters the disc of
/// radius `radius`, if it does.
fn first_entry(r0: Vec2, r1: Vec2, radius: f64) -> Option<f64> {
    let r2 = radius * radius;
    if r0.norm_squared() < r2 {
        return Some(0.0);
    }
    let d = r1 - r0;
    let a = d.norm_squared();
    if a == 0.0 {
        return None;
    }
    let b = 2.0 * r0.dot(d);
    let c = r0.norm_squared() - r2;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let t = (-b - disc.sqrt()) / (2.0 * a);
    (0.0..=1.0).contains(&t).then_some(t)
}

/// Agent reference positions and arclengths over the horizon.
fn agent_rollout(path: &PlannedPath, progress: f64, params: &CollisionParams) -> Vec<(f64, Vec2)> {
    let steps = (params.horizon / params.sim_dt).ceil() as usize;
    (0..=steps)
        .map(|j| {
            let s = (progress + path.target_speed * j as f64 * params.sim_dt).min(path.total_length);
            (s, path.point_at(s))
        })
        .collect()
}

/// Distance along the path to the first contact with a subject starting at
/// `start` and moving at constant `velocity`, or `None` within the horizon.
fn collision_distance(
    rollout: &[(f64, Vec2)],
    progress: f64,
    start: Vec2,
    velocity: Vec2,
    params: &CollisionParams,
) -> Option<f64> {
    let subject_at = |j: usize| start + velocity * (j as f64 * params.sim_dt);
    let mut rel_prev = subject_at(0) - rollout[0].1;
    if rel_prev.norm_squared() < params.collision_radius * params.collision_radius {
        return Some(rollout[0].0 - progress);
    }
    for j in 1..rollout.len() {
        let rel = subject_at(j) - rollout[j].1;
        if let Some(t) = first_entry(rel_prev, rel, params.collision_radius) {
            let (s0, s1) = (rollout[j - 1].0, rollout[j].0);
            return Some(s0 + t * (s1 - s0) - progress);
        }
        rel_prev = rel;
    }
    None
}

/// Collision prediction for one subject belief: `(probability, mean, std)`
/// of the distance to collision over colliding samples, or `None` if no
/// sample collides.
pub fn subject_collision_stats(
    path: &PlannedPath,
    progress: f64,
    belief: &GaussianBelief,
    params: &CollisionParams,
    samples: &BeliefSamples,
) -> Option<(f64, f64, f64)> {
    let rollout = agent_rollout(path, progress, params);
    subject_stats(&rollout, path, progress, belief, params, samples)
}

fn subject_stats(
    rollout: &[(f64, Vec2)],
    path: &PlannedPath,
    progress: f64,
    belief: &GaussianBelief,
    params: &CollisionParams,
    samples: &BeliefSamples,
) -> Option<(f64, f64, f64)> {
    let std = belief.position_std();
    let mean = belief.mean.position;
    let vel = belief.mean.velocity;

    let reach = path.target_speed * params.horizon
        + vel.norm() * params.horizon
        + std.x.max(std.y) * samples.max_radius()
        + params.collision_radius;
    if mean.distance(rollout[0].1) > reach + 1e-9 {
        return None;
    }

    let mut distances = Vec::with_capacity(samples.len());
    for z in samples.offsets() {
        let start = mean + Vec2::new(std.x * z.x, std.y * z.y);
        if let Some(d) = collision_distance(rollout, progress, start, vel, params) {
            distances.push(d);
        }
    }
    if distances.is_empty() {
        return None;
    }
    let n = distances.len() as f64;
    let m = distances.iter().sum::<f64>() / n;
    let var = distances.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / n;
    Some((n / samples.len() as f64, m, var.sqrt()))
}

/// Assesses every informed belief and returns the most restrictive stop.
pub fn assess_collision(
    path: &PlannedPath,
    progress: f64,
    beliefs: &[GaussianBelief],
    params: &CollisionParams,
    samples: &BeliefSamples,
) -> CollisionAssessment {
    let mut out = CollisionAssessment::clear();
    if beliefs.iter().all(|b| !b.informed) {
        return out;
    }
    let rollout = agent_rollout(path, progress, params);
    for belief in beliefs.iter().filter(|b| b.informed) {
        let Some((prob, mean, std)) = subject_stats(&rollout, path, progress, belief, params, samples) else {
            continue;
        };
        if prob < params.probability_threshold {
            continue;
        }
        let stop = progress + (mean - std).max(0.0);
        if !out.imminent || stop < out.stop_arclength {
            out = CollisionAssessment {
                imminent: true,
                stop_arclength: stop,
                mean_distance_to_collision: mean,
                distance_std: std,
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::Kinematic;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn params() -> CollisionParams {
        CollisionParams {
            horizon: 5.0,
            collision_radius: 0.5,
            sim_dt: 0.05,
            probability_threshold: 0.1,
        }
    }

    fn parked(at: Vec2, std: f64) -> GaussianBelief {
        GaussianBelief {
            owner: 0,
            subject: 0,
            mean: Kinematic::new(at, Vec2::ZERO),
            variance: Kinematic::new(v(std * std, std * std).max_each(1e-24), v(1e-24, 1e-24)),
            last_update: 0.0,
            informed: true,
        }
    }

    trait MaxEach {
        fn max_each(self, m: f64) -> Self;
    }
    impl MaxEach for Vec2 {
        fn max_each(self, m: f64) -> Self {
            v(self.x.max(m), self.y.max(m))
        }
    }

    fn straight() -> PlannedPath {
        PlannedPath::from_waypoints(vec![v(0.0, 0.0), v(20.0, 0.0)], 1.5)
    }

    #[test]
    fn samples_are_standardized() {
        let s = BeliefSamples::new(32);
        assert_eq!(s.len(), 32);
        let n = s.len() as f64;
        let mx = s.offsets().iter().map(|o| o.x).sum::<f64>() / n;
        let vx = s.offsets().iter().map(|o| o.x * o.x).sum::<f64>() / n;
        let vy = s.offsets().iter().map(|o| o.y * o.y).sum::<f64>() / n;
        assert!(mx.abs() < 0.1);
        assert!((vx - 1.0).abs() < 0.15 && (vy - 1.0).abs() < 0.15, "{vx} {vy}");
    }

    #[test]
    fn no_subjects_is_clear() {
        let a = assess_collision(&straight(), 0.0, &[], &params(), &BeliefSamples::new(32));
        assert!(!a.imminent);
    }

    #[test]
    fn uninformed_beliefs_are_ignored() {
        let mut b = parked(v(3.0, 0.0), 0.0);
        b.informed = false;
        let a = assess_collision(&straight(), 0.0, &[b], &params(), &BeliefSamples::new(32));
        assert!(!a.imminent);
    }

    #[test]
    fn parked_subject_on_path() {
        let a = assess_collision(
            &straight(),
            1.0,
            &[parked(v(4.0, 0.0), 0.0)],
            &params(),
            &BeliefSamples::new(32),
        );
        assert!(a.imminent);
        assert!((a.mean_distance_to_collision - 2.5).abs() < 1e-9);
        assert!(a.distance_std < 1e-9);
        assert!((a.stop_arclength - 3.5).abs() < 1e-9);
    }

    #[test]
    fn subject_beyond_horizon_is_clear() {
        let a = assess_collision(
            &straight(),
            0.0,
            &[parked(v(15.0, 0.0), 0.0)],
            &params(),
            &BeliefSamples::new(32),
        );
        assert!(!a.imminent);
    }

    #[test]
    fn crossing_subject_timing_matters() {
        // subject crosses x = 3 long before the agent gets there
        let mut early = parked(v(3.0, -1.0), 0.0);
        early.mean.velocity = v(0.0, 5.0);
        let a = assess_collision(&straight(), 0.0, &[early], &params(), &BeliefSamples::new(32));
        assert!(!a.imminent);
        // subject arrives at x = 3 while the agent does (t = 2 s)
        let mut timed = parked(v(3.0, -2.0), 0.0);
        timed.mean.velocity = v(0.0, 1.0);
        let a = assess_collision(&straight(), 0.0, &[timed], &params(), &BeliefSamples::new(32));
        assert!(a.imminent);
    }

    #[test]
    fn already_touching_stops_in_place() {
        let a = assess_collision(
            &straight(),
            2.0,
            &[parked(v(2.2, 0.0), 0.0)],
            &params(),
            &BeliefSamples::new(32),
        );
        assert!(a.imminent);
        assert_eq!(a.stop_arclength, 2.0);
    }

    #[test]
    fn stop_is_conservative_under_uncertainty() {
        let path = straight();
        let s = BeliefSamples::new(32);
        let mut prev = f64::INFINITY;
        for i in 0..=16 {
            let std = 0.01 * i as f64;
            let a = assess_collision(&path, 0.0, &[parked(v(3.0, 0.0), std)], &params(), &s);
            assert!(a.imminent);
            assert!(
                a.stop_arclength <= prev + 1e-12,
                "std {std}: {} > {prev}",
                a.stop_arclength
            );
            prev = a.stop_arclength;
        }
    }

    #[test]
    fn first_entry_cases() {
        assert_eq!(first_entry(v(0.1, 0.0), v(5.0, 0.0), 0.5), Some(0.0));
        let t = first_entry(v(2.0, 0.0), v(0.0, 0.0), 0.5).unwrap();
        assert!((t - 0.75).abs() < 1e-12);
        assert_eq!(first_entry(v(2.0, 1.0), v(-2.0, 1.0), 0.5), None);
        assert_eq!(first_entry(v(2.0, 0.0), v(1.0, 0.0), 0.5), None);
    }
}
