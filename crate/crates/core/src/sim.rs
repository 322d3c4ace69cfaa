//! The closed-loop trial: perception, communication epochs, collision
//! assessment, control and integration, tick by tick.

use serde::{Deserialize, Serialize};

use crate::comms::{run_epoch, EpochInput, EpochLog, SchemeKind};
use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::knapsack::{AgentSnapshot, BandwidthMatrix, CandidateComm, ScoringContext};
use crate::navigation::{
    agent_control, assess_collision, subject_control, BeliefSamples, CollisionAssessment, CollisionParams, Gains,
    StopProfile,
};
use crate::perception::{
    assimilate, is_visible, observe, predict_belief, GaussianBelief, Observation, ObservationModel, ProcessNoise,
};
use crate::utility::UtilityParams;
use crate::world::{advance_world, generate_scenario, stream_rng, subject_leg, SpeedLimits, Stream, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub scheme: SchemeKind,
    pub config_digest: String,
    pub seed: u64,
    /// Time at which the last agent reached its goal, or the time limit.
    pub makespan: f64,
    pub timed_out: bool,
    pub agent_subject_collisions: u64,
    pub agent_agent_collisions: u64,
    pub epochs: u64,
    pub mean_optimizer_time: f64,
    pub max_optimizer_time: f64,
    pub mean_bandwidth_used: f64,
    pub max_bandwidth_used: u32,
    pub bandwidth_limit: u32,
    pub total_deliveries: u64,
    /// Agent-seconds spent with an imminent collision stop in force.
    pub stopped_time: f64,
}

/// A trial's summary and its per-epoch records.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRun {
    pub result: TrialResult,
    pub epoch_logs: Vec<EpochLog>,
    /// Per agent, the first time an imminent-collision stop was in force.
    pub first_stop_times: Vec<Option<f64>>,
    /// Per agent, the time it reached its goal.
    pub finish_times: Vec<Option<f64>>,
}

pub fn run_trial(config: &ScenarioConfig, scheme: SchemeKind) -> Result<TrialResult> {
    Ok(run_trial_observed(config, scheme, &mut |_, _| {})?.result)
}

/// Like [`run_trial`], also reporting every epoch's scored candidates.
pub fn run_trial_observed(
    config: &ScenarioConfig,
    scheme: SchemeKind,
    on_candidates: &mut dyn FnMut(&[CandidateComm], u32),
) -> Result<TrialRun> {
    let world = generate_scenario(config)?;
    Ok(simulate(world, config, scheme, on_candidates))
}

fn in_contact(a: crate::geometry::Vec2, b: crate::geometry::Vec2, radius: f64) -> bool {
    a.distance_squared(b) < radius * radius
}

/// Runs the closed loop on a given world until every agent is within goal
/// tolerance or the time limit passes.
pub fn simulate(
    mut world: WorldState,
    config: &ScenarioConfig,
    scheme: SchemeKind,
    on_candidates: &mut dyn FnMut(&[CandidateComm], u32),
) -> TrialRun {
    let n = world.agents.len();
    let m = world.subjects.len();
    let dt = config.sim_dt;
    let noise = ProcessNoise {
        position: config.process_noise_pos,
        velocity: config.process_noise_vel,
    };
    let model = ObservationModel {
        alpha: config.alpha,
        sigma_floor: config.sigma_floor,
        perceived_scale: config.perceived_sigma_scale,
    };
    let gains = Gains {
        kp: config.kp,
        kd: config.kd,
    };
    let profile = StopProfile {
        ramp: config.stop_ramp,
        standoff: config.stop_standoff,
    };
    let limits = SpeedLimits {
        agent: config.agent_v_max,
        subject: config.subject_v_max,
    };
    let collision = CollisionParams {
        horizon: config.horizon,
        collision_radius: config.collision_radius,
        sim_dt: dt,
        probability_threshold: config.collision_probability_threshold,
    };
    let utility_params = UtilityParams {
        p1: config.p1,
        p2: config.p2,
        horizon: config.horizon,
        proximity_floor: config.collision_radius,
    };
    let samples = BeliefSamples::new(config.collision_samples);
    let bandwidth = BandwidthMatrix::sample(
        n,
        config.pairwise_bandwidth_range,
        &mut stream_rng(config.seed, Stream::Bandwidth),
    );
    let mut perception_rngs: Vec<_> = (0..n)
        .map(|a| stream_rng(config.seed, Stream::Perception { agent: a }))
        .collect();

    let mut beliefs: Vec<Vec<GaussianBelief>> = (0..n)
        .map(|a| {
            (0..m)
                .map(|h| GaussianBelief::uninformed(a, h, config.field_size, config.subject_v_max))
                .collect()
        })
        .collect();
    let mut fresh: Vec<Vec<Option<Observation>>> = vec![vec![None; m]; n];
    let mut finish_time: Vec<Option<f64>> = world
        .agents
        .iter()
        .map(|a| (a.state.position.distance(a.goal) <= config.goal_tolerance).then_some(0.0))
        .collect();
    let mut touching_subject = vec![vec![false; m]; n];
    let mut touching_agent = vec![vec![false; n]; n];
    let mut subject_hits = 0u64;
    let mut agent_hits = 0u64;
    let mut logs = Vec::new();
    let mut stop_ticks = 0u64;
    let mut first_stop: Vec<Option<f64>> = vec![None; n];

    let epoch_ticks = config.epoch_ticks();
    let max_ticks = config.max_ticks();
    let project_window = 4.0 * config.agent_v_max * dt + config.goal_tolerance;
    let mut agent_accel = vec![crate::geometry::Vec2::ZERO; n];
    let mut subject_accel = vec![crate::geometry::Vec2::ZERO; m];

    while finish_time.iter().any(Option::is_none) && world.tick < max_ticks {
        let now = world.time();

        for (k, s) in world.subjects.iter_mut().enumerate() {
            let done = s.reference_arclength(now) >= s.trajectory.length();
            if done && s.state.position.distance(s.trajectory.goal()) <= config.goal_tolerance {
                s.leg += 1;
                s.trajectory = subject_leg(config, k, s.leg, s.state.position, None);
                s.goal = s.trajectory.goal();
                s.leg_start = now;
            }
        }

        for a in 0..n {
            let observer = world.agents[a].state;
            for h in 0..m {
                let subject = world.subjects[h].state;
                if !is_visible(observer.position, subject.position, &world.walls) {
                    continue;
                }
                let obs = observe(&model, a, h, now, &observer, &subject, &mut perception_rngs[a]);
                beliefs[a][h] = assimilate(&beliefs[a][h], &obs, noise);
                fresh[a][h] = Some(obs);
            }
        }

        if world.tick.is_multiple_of(epoch_ticks) {
            let uploads: Vec<Vec<Observation>> = fresh
                .iter_mut()
                .map(|f| f.iter_mut().filter_map(Option::take).collect())
                .collect();
            let snapshots: Vec<AgentSnapshot<'_>> = world
                .agents
                .iter()
                .zip(&finish_time)
                .map(|(agent, f)| AgentSnapshot {
                    path: &agent.path,
                    progress: agent.progress,
                    finished: f.is_some(),
                })
                .collect();
            let input = EpochInput {
                scheme,
                uploads: &uploads,
                agents: &snapshots,
                bandwidth: &bandwidth,
                budget: config.bandwidth_limit,
                utility_epsilon: config.utility_epsilon,
                scoring: ScoringContext {
                    params: utility_params,
                    noise,
                    kappa_scale: config.kappa_scale,
                    sim_dt: dt,
                    now,
                },
            };
            logs.push(run_epoch(&input, &mut beliefs, on_candidates));
        }

        for (a, agent) in world.agents.iter_mut().enumerate() {
            agent.progress = agent.path.project(agent.state.position, agent.progress, project_window);
            let assessment = if finish_time[a].is_some() {
                CollisionAssessment::clear()
            } else {
                let current: Vec<GaussianBelief> = beliefs[a]
                    .iter()
                    .map(|b| {
                        if b.informed {
                            predict_belief(b, now.max(b.last_update), noise)
                        } else {
                            *b
                        }
                    })
                    .collect();
                assess_collision(&agent.path, agent.progress, &current, &collision, &samples)
            };
            stop_ticks += u64::from(assessment.imminent);
            if assessment.imminent && first_stop[a].is_none() {
                first_stop[a] = Some(now);
            }
            agent_accel[a] = agent_control(
                &agent.state,
                &agent.path,
                agent.progress,
                &assessment,
                gains,
                config.a_max,
                profile,
            );
        }
        for (h, s) in world.subjects.iter().enumerate() {
            subject_accel[h] =
                subject_control(&s.state, &s.trajectory, s.reference_arclength(now), gains, config.a_max);
        }

        advance_world(&mut world, &agent_accel, &subject_accel, dt, limits);
        let now = world.time();

        let r = config.collision_radius;
        for a in 0..n {
            let p = world.agents[a].state.position;
            for h in 0..m {
                let c = in_contact(p, world.subjects[h].state.position, r);
                subject_hits += u64::from(c && !touching_subject[a][h]);
                touching_subject[a][h] = c;
            }
            for b in a + 1..n {
                let c = in_contact(p, world.agents[b].state.position, r);
                agent_hits += u64::from(c && !touching_agent[a][b]);
                touching_agent[a][b] = c;
            }
            if finish_time[a].is_none() && p.distance(world.agents[a].goal) <= config.goal_tolerance {
                finish_time[a] = Some(now);
            }
        }
    }

    let timed_out = finish_time.iter().any(Option::is_none);
    let makespan = if timed_out {
        config.max_sim_time
    } else {
        finish_time.iter().flatten().fold(0.0, |acc: f64, &t| acc.max(t))
    };
    let active: Vec<&EpochLog> = logs.iter().filter(|l| l.candidate_count > 0).collect();
    let epochs = logs.len() as u64;
    let mean_optimizer_time = if active.is_empty() {
        0.0
    } else {
        active.iter().map(|l| l.optimizer_time).sum::<f64>() / active.len() as f64
    };
    let result = TrialResult {
        scheme,
        config_digest: config.digest(),
        seed: config.seed,
        makespan,
        timed_out,
        agent_subject_collisions: subject_hits,
        agent_agent_collisions: agent_hits,
        epochs,
        mean_optimizer_time,
        max_optimizer_time: logs.iter().map(|l| l.optimizer_time).fold(0.0, f64::max),
        mean_bandwidth_used: if logs.is_empty() {
            0.0
        } else {
            logs.iter().map(|l| f64::from(l.bandwidth_used)).sum::<f64>() / logs.len() as f64
        },
        max_bandwidth_used: logs.iter().map(|l| l.bandwidth_used).max().unwrap_or(0),
        bandwidth_limit: config.bandwidth_limit,
        total_deliveries: logs.iter().map(|l| l.chosen_count as u64).sum(),
        stopped_time: stop_ticks as f64 * dt,
    };
    TrialRun {
        result,
        epoch_logs: logs,
        first_stop_times: first_stop,
        finish_times: finish_time,
    }
}

/// Scale for raw kappa so that typical information gains are comparable
/// to the proximity term: the 95th percentile of raw kappa over all scored
/// candidates of `trials` default trials starting at `base_seed`.
pub fn calibrate_kappa_scale(base: &ScenarioConfig, trials: u64, base_seed: u64) -> Result<f64> {
    let mut raw = Vec::new();
    for t in 0..trials {
        let config = ScenarioConfig {
            seed: base_seed + t,
            p1: 1.0,
            p2: 0.0,
            kappa_scale: 1.0,
            utility_epsilon: 0.0,
            ..base.clone()
        };
        run_trial_observed(&config, SchemeKind::Iknap, &mut |c, _| {
            raw.extend(c.iter().map(|c| c.utility))
        })?;
    }
    if raw.is_empty() {
        return Ok(1.0);
    }
    raw.sort_by(f64::total_cmp);
    let idx = ((raw.len() - 1) as f64 * 0.95).round() as usize;
    Ok(raw[idx].max(f64::MIN_POSITIVE))
}
