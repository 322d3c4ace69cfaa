//! Scenario configuration.
//!
//! Every field has a default and can be set from a TOML key/value file (keys
//! are the field names below) or overridden field-by-field with
//! [`ScenarioConfig::set_field`], which is what the CLI flags use.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 95th percentile of raw KL gains over the default calibration batch
/// (`knapnav calibrate`, 20 trials, base seed 0). Divides raw kappa so
/// that p1 = p2 = 1 weighs belief gain and proximity comparably.
pub const DEFAULT_KAPPA_SCALE: f64 = 25.44;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_agents: usize,
    pub m_subjects: usize,
    pub n_walls: usize,
    /// Side of the square field, meters.
    pub field_size: f64,
    /// Observation noise gain: sigma = alpha / d^2.
    pub alpha: f64,
    /// Communication period, seconds.
    pub comm_period: f64,
    /// Per-epoch bandwidth budget, integer units.
    pub bandwidth_limit: u32,
    /// Inclusive range pairwise costs are drawn from.
    pub pairwise_bandwidth_range: [u32; 2],
    /// Prediction horizon for utility and collision checks, seconds.
    pub horizon: f64,
    pub p1: f64,
    pub p2: f64,
    pub sim_dt: f64,
    pub max_sim_time: f64,
    pub goal_tolerance: f64,
    pub collision_radius: f64,
    pub seed: u64,

    pub kappa_scale: f64,
    pub sigma_floor: f64,
    pub perceived_sigma_scale: f64,
    /// Position process noise, m^2/s.
    pub process_noise_pos: f64,
    /// Velocity process noise, (m/s)^2/s.
    pub process_noise_vel: f64,
    pub agent_speed: f64,
    pub agent_v_max: f64,
    pub subject_speed_range: [f64; 2],
    pub subject_v_max: f64,
    pub a_max: f64,
    pub kp: f64,
    pub kd: f64,
    pub wall_length_range: [f64; 2],
    /// Planner clearance as a multiple of `collision_radius`.
    pub clearance_factor: f64,
    pub subject_interior_points: [usize; 2],
    pub collision_samples: usize,
    /// Fraction of belief samples that must collide for a stop.
    pub collision_probability_threshold: f64,
    /// Distance over which reference speed ramps to zero before a stop point.
    pub stop_ramp: f64,
    /// Gap kept between the commanded stop point and the collision radius.
    pub stop_standoff: f64,
    /// Candidates with utility below this are not offered to the optimizer.
    pub utility_epsilon: f64,
    /// Bandwidth unit used to quantize fractional message sizes.
    pub bandwidth_quantum: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_agents: 5,
            m_subjects: 5,
            n_walls: 10,
            field_size: 40.0,
            alpha: 0.01,
            comm_period: 1.0,
            bandwidth_limit: 25,
            pairwise_bandwidth_range: [1, 10],
            horizon: 5.0,
            p1: 1.0,
            p2: 1.0,
            sim_dt: 0.05,
            max_sim_time: 120.0,
            goal_tolerance: 0.5,
            collision_radius: 0.5,
            seed: 0,
            kappa_scale: DEFAULT_KAPPA_SCALE,
            sigma_floor: 1e-3,
            perceived_sigma_scale: 1.0,
            process_noise_pos: 0.05,
            process_noise_vel: 0.05,
            agent_speed: 1.5,
            agent_v_max: 2.0,
            subject_speed_range: [0.5, 2.0],
            subject_v_max: 2.5,
            a_max: 3.0,
            kp: 4.0,
            kd: 4.0,
            wall_length_range: [4.0, 10.0],
            clearance_factor: 1.5,
            subject_interior_points: [2, 4],
            collision_samples: 32,
            collision_probability_threshold: 0.1,
            stop_ramp: 1.0,
            stop_standoff: 0.1,
            utility_epsilon: 1e-9,
            bandwidth_quantum: 1.0,
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidConfig(msg()))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("field_size", self.field_size),
            ("comm_period", self.comm_period),
            ("horizon", self.horizon),
            ("sim_dt", self.sim_dt),
            ("max_sim_time", self.max_sim_time),
            ("goal_tolerance", self.goal_tolerance),
            ("collision_radius", self.collision_radius),
            ("kappa_scale", self.kappa_scale),
            ("sigma_floor", self.sigma_floor),
            ("perceived_sigma_scale", self.perceived_sigma_scale),
            ("agent_speed", self.agent_speed),
            ("agent_v_max", self.agent_v_max),
            ("subject_v_max", self.subject_v_max),
            ("a_max", self.a_max),
            ("kp", self.kp),
            ("kd", self.kd),
            ("clearance_factor", self.clearance_factor),
            ("stop_ramp", self.stop_ramp),
            ("bandwidth_quantum", self.bandwidth_quantum),
        ];
        for (name, value) in positive {
            check(value.is_finite() && value > 0.0, || {
                format!("{name} must be positive and finite, got {value}")
            })?;
        }
        let nonneg = [
            ("alpha", self.alpha),
            ("p1", self.p1),
            ("p2", self.p2),
            ("process_noise_pos", self.process_noise_pos),
            ("process_noise_vel", self.process_noise_vel),
            ("stop_standoff", self.stop_standoff),
            ("utility_epsilon", self.utility_epsilon),
        ];
        for (name, value) in nonneg {
            check(value.is_finite() && value >= 0.0, || {
                format!("{name} must be non-negative and finite, got {value}")
            })?;
        }
        check(self.comm_period >= self.sim_dt, || {
            format!("comm_period {} shorter than sim_dt {}", self.comm_period, self.sim_dt)
        })?;
        let [bmin, bmax] = self.pairwise_bandwidth_range;
        check(bmin >= 1 && bmax >= bmin, || {
            format!("pairwise_bandwidth_range [{bmin}, {bmax}] needs 1 <= min <= max")
        })?;
        let [smin, smax] = self.subject_speed_range;
        check(smin > 0.0 && smax >= smin && smax <= self.subject_v_max, || {
            format!("subject_speed_range [{smin}, {smax}] must lie in (0, subject_v_max]")
        })?;
        check(self.agent_speed <= self.agent_v_max, || {
            "agent_speed exceeds agent_v_max".to_string()
        })?;
        let [wmin, wmax] = self.wall_length_range;
        check(wmin > 0.0 && wmax >= wmin && wmax < self.field_size, || {
            format!(
                "wall_length_range [{wmin}, {wmax}] invalid for field {}",
                self.field_size
            )
        })?;
        let [imin, imax] = self.subject_interior_points;
        check(imax >= imin, || "subject_interior_points needs min <= max".to_string())?;
        check(self.collision_samples >= 1, || {
            "collision_samples must be >= 1".to_string()
        })?;
        check(
            self.collision_probability_threshold > 0.0 && self.collision_probability_threshold <= 1.0,
            || "collision_probability_threshold must be in (0, 1]".to_string(),
        )?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Names of every configurable field, in declaration order.
    pub fn field_names() -> Vec<String> {
        let table = toml::Table::try_from(ScenarioConfig::default()).expect("serializable");
        table.keys().cloned().collect()
    }

    /// Sets one field from its textual value (TOML syntax: `5`, `0.01`, `[1, 10]`).
    pub fn set_field(&mut self, key: &str, value: &str) -> Result<()> {
        let mut table = toml::Table::try_from(&*self).expect("serializable");
        let Some(current) = table.get(key) else {
            return Err(Error::UnknownParameter(key.to_string()));
        };
        let parsed: toml::Value = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .ok_or_else(|| Error::InvalidConfig(format!("cannot parse `{value}` for {key}")))?;
        // integers are accepted where floats are expected
        let parsed = match (current, parsed) {
            (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (_, p) => p,
        };
        table.insert(key.to_string(), parsed);
        *self = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidConfig(format!("{key}: {e}")))?;
        Ok(())
    }

    /// Number of simulation ticks per communication epoch.
    pub fn epoch_ticks(&self) -> u64 {
        ((self.comm_period / self.sim_dt).round() as u64).max(1)
    }

    pub fn max_ticks(&self) -> u64 {
        (self.max_sim_time / self.sim_dt).round() as u64
    }

    pub fn clearance(&self) -> f64 {
        self.clearance_factor * self.collision_radius
    }

    /// Short stable digest of the configuration, used to tag result rows.
    pub fn digest(&self) -> String {
        // FNV-1a over the canonical TOML rendering
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in self.to_toml_string().bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}
