//! Ground-truth world state, seeded scenario generation and double
//! integrator stepping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::{Vec2, Wall};
use crate::navigation::{generate_subject_trajectory, plan_path, PlannedPath, SplineTrajectory};

/// Retries allowed when placing a single body or wall.
pub const PLACEMENT_RETRIES: usize = 1000;
/// Full wall-layout redraws allowed when some agent has no path.
const LAYOUT_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyState {
    pub position: Vec2,
    pub velocity: Vec2,
}

impl BodyState {
    pub const fn new(position: Vec2, velocity: Vec2) -> Self {
        Self { position, velocity }
    }
}

/// Semi-implicit Euler step with speed saturation at `v_max`.
pub fn advance_body(state: BodyState, accel: Vec2, dt: f64, v_max: f64) -> BodyState {
    let velocity = (state.velocity + accel * dt).clamp_norm(v_max);
    BodyState {
        position: state.position + velocity * dt,
        velocity,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub start: Vec2,
    pub goal: Vec2,
    pub state: BodyState,
    pub path: PlannedPath,
    /// Arclength of the agent's projection onto its path.
    pub progress: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    pub start: Vec2,
    pub goal: Vec2,
    pub state: BodyState,
    pub trajectory: SplineTrajectory,
    /// Simulation time at which the current trajectory leg began.
    pub leg_start: f64,
    pub leg: u64,
}

impl Subject {
    /// Arclength of the moving reference on the current leg at `time`.
    pub fn reference_arclength(&self, time: f64) -> f64 {
        ((time - self.leg_start) * self.trajectory.target_speed).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub tick: u64,
    pub sim_dt: f64,
    pub agents: Vec<Agent>,
    pub subjects: Vec<Subject>,
    pub walls: Vec<Wall>,
}

impl WorldState {
    /// Simulation time; always an exact multiple of `sim_dt`.
    pub fn time(&self) -> f64 {
        self.tick as f64 * self.sim_dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedLimits {
    pub agent: f64,
    pub subject: f64,
}

/// Advances every body by one tick and increments the clock.
pub fn advance_world(
    world: &mut WorldState,
    agent_accel: &[Vec2],
    subject_accel: &[Vec2],
    dt: f64,
    limits: SpeedLimits,
) {
    debug_assert_eq!(dt, world.sim_dt);
    debug_assert_eq!(agent_accel.len(), world.agents.len());
    debug_assert_eq!(subject_accel.len(), world.subjects.len());
    for (agent, &a) in world.agents.iter_mut().zip(agent_accel) {
        agent.state = advance_body(agent.state, a, dt, limits.agent);
    }
    for (subject, &a) in world.subjects.iter_mut().zip(subject_accel) {
        subject.state = advance_body(subject.state, a, dt, limits.subject);
    }
    world.tick += 1;
}

/// Independent random streams derived from the trial seed.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Layout,
    Bandwidth,
    SubjectLeg { subject: usize, leg: u64 },
    Perception { agent: usize },
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Layout => 0,
            Stream::Bandwidth => 1,
            Stream::SubjectLeg { subject, leg } => (2 << 48) | ((subject as u64) << 24) | leg,
            Stream::Perception { agent } => (3 << 48) | agent as u64,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// Trajectory for leg `leg` of subject `subject`, from `from` to a goal
/// drawn from the same stream (leg 0 uses the scenario goal instead).
pub fn subject_leg(
    config: &ScenarioConfig,
    subject: usize,
    leg: u64,
    from: Vec2,
    goal: Option<Vec2>,
) -> SplineTrajectory {
    let mut rng = stream_rng(config.seed, Stream::SubjectLeg { subject, leg });
    let f = config.field_size;
    let goal = goal.unwrap_or_else(|| loop {
        let g = Vec2::new(rng.random_range(0.0..f), rng.random_range(0.0..f));
        if g.distance(from) >= f / 4.0 {
            break g;
        }
    });
    generate_subject_trajectory(
        from,
        goal,
        f,
        config.subject_interior_points,
        config.subject_speed_range,
        &mut rng,
    )
}

fn place_point<R: Rng>(rng: &mut R, field: f64, margin: f64, ok: impl Fn(Vec2) -> bool, what: &str) -> Result<Vec2> {
    for _ in 0..PLACEMENT_RETRIES {
        let p = Vec2::new(
            rng.random_range(margin..field - margin),
            rng.random_range(margin..field - margin),
        );
        if ok(p) {
            return Ok(p);
        }
    }
    Err(Error::InfeasibleScenario(format!(
        "could not place {what} after {PLACEMENT_RETRIES} attempts"
    )))
}

fn far_from_all(p: Vec2, others: &[Vec2], min_sep: f64) -> bool {
    others.iter().all(|q| q.distance(p) >= min_sep)
}

fn random_wall<R: Rng>(rng: &mut R, config: &ScenarioConfig) -> Option<Wall> {
    let f = config.field_size;
    let [lmin, lmax] = config.wall_length_range;
    let center = Vec2::new(rng.random_range(0.0..f), rng.random_range(0.0..f));
    let angle = rng.random_range(0.0..std::f64::consts::PI);
    let len = if lmax > lmin {
        rng.random_range(lmin..=lmax)
    } else {
        lmin
    };
    let half = Vec2::new(angle.cos(), angle.sin()) * (len / 2.0);
    let (a, b) = (center - half, center + half);
    let inside = |p: Vec2| (0.0..=f).contains(&p.x) && (0.0..=f).contains(&p.y);
    (inside(a) && inside(b)).then(|| Wall::new(a, b))
}

/// Random scenario: non-overlapping starts, random goals and walls that
/// keep clear of every start and goal. Deterministic in `config.seed`.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<WorldState> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, Stream::Layout);
    let f = config.field_size;
    let r = config.collision_radius;
    let sep = 2.0 * r;
    let margin = r;
    let min_trip = f / 4.0;

    let mut starts: Vec<Vec2> = Vec::new();
    for i in 0..config.n_agents + config.m_subjects {
        let p = place_point(
            &mut rng,
            f,
            margin,
            |p| far_from_all(p, &starts, sep),
            &format!("start {i}"),
        )?;
        starts.push(p);
    }
    let (agent_starts, subject_starts) = starts.split_at(config.n_agents);

    let mut agent_goals: Vec<Vec2> = Vec::new();
    for (i, &s) in agent_starts.iter().enumerate() {
        let g = place_point(
            &mut rng,
            f,
            margin,
            |p| p.distance(s) >= min_trip && far_from_all(p, &agent_goals, sep),
            &format!("goal of agent {i}"),
        )?;
        agent_goals.push(g);
    }
    let mut subject_goals = Vec::new();
    for (k, &s) in subject_starts.iter().enumerate() {
        let g = place_point(
            &mut rng,
            f,
            margin,
            |p| p.distance(s) >= min_trip,
            &format!("goal of subject {k}"),
        )?;
        subject_goals.push(g);
    }

    // Wall discs around agent endpoints leave room for the planner clearance.
    let agent_disc = config.clearance() * 1.2;
    let keep_clear: Vec<(Vec2, f64)> = agent_starts
        .iter()
        .chain(&agent_goals)
        .map(|&p| (p, agent_disc))
        .chain(subject_starts.iter().chain(&subject_goals).map(|&p| (p, r)))
        .collect();

    let mut layout = None;
    for _ in 0..LAYOUT_RETRIES {
        let mut walls = Vec::with_capacity(config.n_walls);
        for w in 0..config.n_walls {
            let mut placed = None;
            for _ in 0..PLACEMENT_RETRIES {
                if let Some(wall) = random_wall(&mut rng, config) {
                    if keep_clear.iter().all(|&(p, d)| wall.distance_to_point(p) > d) {
                        placed = Some(wall);
                        break;
                    }
                }
            }
            let wall = placed.ok_or_else(|| {
                Error::InfeasibleScenario(format!("could not place wall {w} after {PLACEMENT_RETRIES} attempts"))
            })?;
            walls.push(wall);
        }
        let paths: Result<Vec<PlannedPath>> = agent_starts
            .iter()
            .zip(&agent_goals)
            .map(|(&s, &g)| plan_path(s, g, &walls, config.clearance(), config.agent_speed))
            .collect();
        if let Ok(paths) = paths {
            layout = Some((walls, paths));
            break;
        }
    }
    let (walls, paths) = layout.ok_or_else(|| {
        Error::InfeasibleScenario(format!(
            "no wall layout with planable paths in {LAYOUT_RETRIES} attempts"
        ))
    })?;

    let agents = agent_starts
        .iter()
        .zip(agent_goals)
        .zip(paths)
        .map(|((&start, goal), path)| Agent {
            start,
            goal,
            state: BodyState::new(start, Vec2::ZERO),
            path,
            progress: 0.0,
        })
        .collect();
    let subjects = subject_starts
        .iter()
        .zip(subject_goals)
        .enumerate()
        .map(|(k, (&start, goal))| Subject {
            start,
            goal,
            state: BodyState::new(start, Vec2::ZERO),
            trajectory: subject_leg(config, k, 0, start, Some(goal)),
            leg_start: 0.0,
            leg: 0,
        })
        .collect();

    Ok(WorldState {
        tick: 0,
        sim_dt: config.sim_dt,
        agents,
        subjects,
        walls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn empty_world() -> WorldState {
        WorldState {
            tick: 0,
            sim_dt: 0.1,
            agents: vec![],
            subjects: vec![],
            walls: vec![],
        }
    }

    #[test]
    fn constant_velocity_step() {
        let s = advance_body(BodyState::new(v(0.0, 0.0), v(1.0, 0.0)), Vec2::ZERO, 0.1, 10.0);
        assert_eq!(s.position, v(0.1, 0.0));
        assert_eq!(s.velocity, v(1.0, 0.0));
    }

    #[test]
    fn acceleration_step_is_semi_implicit() {
        let s = advance_body(BodyState::new(v(0.0, 0.0), Vec2::ZERO), v(2.0, 0.0), 0.1, 10.0);
        assert!((s.velocity.x - 0.2).abs() < 1e-15);
        assert!((s.position.x - 0.02).abs() < 1e-15);
    }

    #[test]
    fn ten_steps_match_closed_form() {
        let mut s = BodyState::new(v(0.0, 0.0), v(1.0, 0.0));
        for _ in 0..10 {
            s = advance_body(s, Vec2::ZERO, 0.1, 10.0);
        }
        assert!((s.position.x - 1.0).abs() < 1e-12);
        assert_eq!(s.position.y, 0.0);
    }

    #[test]
    fn speed_saturates() {
        let s = advance_body(BodyState::new(v(0.0, 0.0), v(1.9, 0.0)), v(10.0, 0.0), 0.1, 2.0);
        assert!((s.velocity.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn advance_world_ticks_clock() {
        let mut w = empty_world();
        let limits = SpeedLimits {
            agent: 1.0,
            subject: 1.0,
        };
        for _ in 0..3 {
            advance_world(&mut w, &[], &[], 0.1, limits);
        }
        assert_eq!(w.tick, 3);
        assert_eq!(w.time(), 3.0 * 0.1);
    }

    #[test]
    fn empty_scenario() {
        let cfg = ScenarioConfig {
            n_agents: 0,
            m_subjects: 0,
            n_walls: 0,
            ..Default::default()
        };
        let w = generate_scenario(&cfg).unwrap();
        assert!(w.agents.is_empty() && w.subjects.is_empty() && w.walls.is_empty());
    }

    #[test]
    fn scenario_is_deterministic() {
        let cfg = ScenarioConfig {
            seed: 42,
            ..Default::default()
        };
        assert_eq!(generate_scenario(&cfg).unwrap(), generate_scenario(&cfg).unwrap());
        let other = ScenarioConfig {
            seed: 43,
            ..cfg.clone()
        };
        assert_ne!(generate_scenario(&cfg).unwrap(), generate_scenario(&other).unwrap());
    }

    #[test]
    fn default_scenario_layout() {
        for seed in 0..20 {
            let cfg = ScenarioConfig {
                seed,
                ..Default::default()
            };
            let w = generate_scenario(&cfg).unwrap();
            assert_eq!((w.agents.len(), w.subjects.len(), w.walls.len()), (5, 5, 10));
            let starts: Vec<Vec2> = w
                .agents
                .iter()
                .map(|a| a.start)
                .chain(w.subjects.iter().map(|s| s.start))
                .collect();
            for i in 0..starts.len() {
                for j in i + 1..starts.len() {
                    assert!(starts[i].distance(starts[j]) >= 2.0 * cfg.collision_radius);
                }
            }
            for a in &w.agents {
                assert!(a.path.wall_clearance(&w.walls) >= cfg.clearance());
                assert_eq!(a.path.start(), a.start);
                assert_eq!(a.path.goal(), a.goal);
            }
            for s in &w.subjects {
                assert_eq!(s.trajectory.start(), s.start);
                assert_eq!(s.trajectory.goal(), s.goal);
            }
            for wall in &w.walls {
                for p in w.agents.iter().flat_map(|a| [a.start, a.goal]) {
                    assert!(wall.distance_to_point(p) > cfg.clearance());
                }
            }
        }
    }

    #[test]
    fn overcrowded_field_is_infeasible() {
        let cfg = ScenarioConfig {
            n_agents: 500,
            m_subjects: 500,
            field_size: 10.0,
            wall_length_range: [1.0, 2.0],
            ..Default::default()
        };
        assert!(matches!(generate_scenario(&cfg), Err(Error::InfeasibleScenario(_))));
    }

    #[test]
    fn streams_are_independent() {
        let a: u64 = stream_rng(1, Stream::Layout).random();
        let b: u64 = stream_rng(1, Stream::Bandwidth).random();
        let c: u64 = stream_rng(1, Stream::Perception { agent: 0 }).random();
        assert!(a != b && b != c && a != c);
    }
}
