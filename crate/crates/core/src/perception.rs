//! Occlusion-aware noisy observations and per-(agent, subject) Gaussian
//! beliefs.
//!
//! Beliefs are diagonal Gaussians over the stacked position and velocity
//! vector. Fusion works per axis in precision form, prediction assumes
//! constant velocity, and the KL divergence is the closed form for
//! diagonal Gaussians.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{Vec2, Wall};
use crate::world::BodyState;

pub type AgentId = usize;
pub type SubjectId = usize;

/// A position/velocity pair. Used for means as well as for per-axis
/// standard deviations and variances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Kinematic {
    pub position: Vec2,
    pub velocity: Vec2,
}

impl Kinematic {
    pub const fn new(position: Vec2, velocity: Vec2) -> Self {
        Self { position, velocity }
    }

    pub fn splat(v: f64) -> Self {
        Self::new(Vec2::new(v, v), Vec2::new(v, v))
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.position.x, self.position.y, self.velocity.x, self.velocity.y]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(Vec2::new(a[0], a[1]), Vec2::new(a[2], a[3]))
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_array(self.to_array().map(f))
    }
}

impl From<BodyState> for Kinematic {
    fn from(s: BodyState) -> Self {
        Kinematic::new(s.position, s.velocity)
    }
}

/// A noisy sample of a subject's state together with the standard deviation
/// the observer assigns to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub observer: AgentId,
    pub subject: SubjectId,
    pub time: f64,
    pub mean: Kinematic,
    pub perceived_sigma: Kinematic,
}

impl Observation {
    pub fn variance(&self) -> Kinematic {
        self.perceived_sigma.map(|s| s * s)
    }

    /// The observation viewed as a Gaussian belief held by `owner`.
    pub fn as_belief(&self, owner: AgentId) -> GaussianBelief {
        GaussianBelief {
            owner,
            subject: self.subject,
            mean: self.mean,
            variance: self.variance(),
            last_update: self.time,
            informed: true,
        }
    }

    /// Carries the observation forward to `to_time` under the same constant
    /// velocity model beliefs use, so it can be fused into a belief that is
    /// already newer than the sample.
    pub fn propagated(&self, to_time: f64, noise: ProcessNoise) -> Observation {
        let b = predict_belief(&self.as_belief(self.observer), to_time, noise);
        Observation {
            time: b.last_update,
            mean: b.mean,
            perceived_sigma: b.variance.map(f64::sqrt),
            ..*self
        }
    }
}

/// Distance-dependent noise model: sigma = max(alpha / d^2, sigma_floor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationModel {
    pub alpha: f64,
    pub sigma_floor: f64,
    /// Ratio of the self-assigned sigma to the true sampling sigma.
    pub perceived_scale: f64,
}

impl ObservationModel {
    pub fn new(alpha: f64, sigma_floor: f64) -> Self {
        debug_assert!(alpha >= 0.0 && sigma_floor > 0.0);
        Self {
            alpha,
            sigma_floor,
            perceived_scale: 1.0,
        }
    }

    /// True sampling standard deviation at range `distance`.
    pub fn sigma_at(&self, distance: f64) -> f64 {
        let d2 = distance * distance;
        if d2 == 0.0 {
            return self.sigma_floor;
        }
        (self.alpha / d2).max(self.sigma_floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessNoise {
    /// m^2/s added to each position axis.
    pub position: f64,
    /// (m/s)^2/s added to each velocity axis.
    pub velocity: f64,
}

/// Diagonal Gaussian belief of `owner` about `subject`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBelief {
    pub owner: AgentId,
    pub subject: SubjectId,
    pub mean: Kinematic,
    pub variance: Kinematic,
    pub last_update: f64,
    /// Whether any observation has been fused since initialization.
    pub informed: bool,
}

impl GaussianBelief {
    /// Near-uninformative prior: field center, at rest, variance of the
    /// field size squared on position and `v_max^2` on velocity.
    pub fn uninformed(owner: AgentId, subject: SubjectId, field_size: f64, v_max: f64) -> Self {
        let c = field_size / 2.0;
        Self {
            owner,
            subject,
            mean: Kinematic::new(Vec2::new(c, c), Vec2::ZERO),
            variance: Kinematic::new(
                Vec2::new(field_size * field_size, field_size * field_size),
                Vec2::new(v_max * v_max, v_max * v_max),
            ),
            last_update: 0.0,
            informed: false,
        }
    }

    pub fn position_std(&self) -> Vec2 {
        Vec2::new(self.variance.position.x.sqrt(), self.variance.position.y.sqrt())
    }
}

/// True iff the sightline between the two positions crosses no wall.
pub fn is_visible(agent_pos: Vec2, subject_pos: Vec2, walls: &[Wall]) -> bool {
    walls.iter().all(|w| !w.intersects(agent_pos, subject_pos))
}

/// Samples an observation of `subject_state` from `observer_state`.
pub fn observe<R: Rng + ?Sized>(
    model: &ObservationModel,
    observer: AgentId,
    subject: SubjectId,
    time: f64,
    observer_state: &BodyState,
    subject_state: &BodyState,
    rng: &mut R,
) -> Observation {
    let sigma = model.sigma_at(observer_state.position.distance(subject_state.position));
    let truth = Kinematic::from(*subject_state).to_array();
    let noisy = truth.map(|x| {
        let z: f64 = StandardNormal.sample(rng);
        x + sigma * z
    });
    Observation {
        observer,
        subject,
        time,
        mean: Kinematic::from_array(noisy),
        perceived_sigma: Kinematic::splat(sigma * model.perceived_scale),
    }
}

/// Precision-weighted fusion of `obs` into `belief`, per axis. The belief
/// must already be predicted to the observation time.
pub fn fuse(belief: &GaussianBelief, obs: &Observation) -> GaussianBelief {
    debug_assert_eq!(belief.subject, obs.subject);
    let prior_mean = belief.mean.to_array();
    let prior_var = belief.variance.to_array();
    let obs_mean = obs.mean.to_array();
    let obs_var = obs.variance().to_array();

    let mut mean = [0.0; 4];
    let mut var = [0.0; 4];
    for i in 0..4 {
        let prior_prec = 1.0 / prior_var[i];
        let obs_prec = 1.0 / obs_var[i];
        let prec = prior_prec + obs_prec;
        var[i] = 1.0 / prec;
        mean[i] = (prior_prec * prior_mean[i] + obs_prec * obs_mean[i]) / prec;
    }
    GaussianBelief {
        mean: Kinematic::from_array(mean),
        variance: Kinematic::from_array(var),
        last_update: belief.last_update.max(obs.time),
        informed: true,
        ..*belief
    }
}

/// Constant-velocity prediction of `belief` to `to_time`.
pub fn predict_belief(belief: &GaussianBelief, to_time: f64, noise: ProcessNoise) -> GaussianBelief {
    debug_assert!(to_time >= belief.last_update - 1e-12);
    let dt = (to_time - belief.last_update).max(0.0);
    if dt == 0.0 {
        return *belief;
    }
    let m = belief.mean;
    let v = belief.variance;
    let pos_var = |p: f64, vel: f64| p + vel * dt * dt + noise.position * dt;
    GaussianBelief {
        mean: Kinematic::new(m.position + m.velocity * dt, m.velocity),
        variance: Kinematic::new(
            Vec2::new(pos_var(v.position.x, v.velocity.x), pos_var(v.position.y, v.velocity.y)),
            Vec2::new(v.velocity.x + noise.velocity * dt, v.velocity.y + noise.velocity * dt),
        ),
        last_update: to_time,
        ..*belief
    }
}

/// Brings `belief` and `obs` to the later of their two timestamps. Older
/// observations are propagated forward rather than rewinding the belief.
pub fn align(belief: &GaussianBelief, obs: &Observation, noise: ProcessNoise) -> (GaussianBelief, Observation) {
    if obs.time >= belief.last_update {
        (predict_belief(belief, obs.time, noise), *obs)
    } else {
        (*belief, obs.propagated(belief.last_update, noise))
    }
}

/// Aligns `belief` and `obs` in time and fuses them.
pub fn assimilate(belief: &GaussianBelief, obs: &Observation, noise: ProcessNoise) -> GaussianBelief {
    let (prior, obs) = align(belief, obs, noise);
    fuse(&prior, &obs)
}

/// KL(post || prior) in nats for diagonal Gaussians over all four axes.
pub fn kl_divergence(post: &GaussianBelief, prior: &GaussianBelief) -> f64 {
    let pm = post.mean.to_array();
    let pv = post.variance.to_array();
    let qm = prior.mean.to_array();
    let qv = prior.variance.to_array();
    let sum: f64 = (0..4)
        .map(|i| {
            let d = qm[i] - pm[i];
            pv[i] / qv[i] + d * d / qv[i] - 1.0 + (qv[i] / pv[i]).ln()
        })
        .sum();
    (0.5 * sum).max(0.0)
}
