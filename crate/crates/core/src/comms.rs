//! The centralized broker: collects each agent's fresh observations at the
//! end of a communication window, selects which ones to relay under the
//! bandwidth budget and delivers them to the receivers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::knapsack::{
    enumerate_candidates, solve_knapsack_pruned, AgentSnapshot, BandwidthMatrix, CandidateComm, ScoringContext,
};
use crate::perception::{assimilate, GaussianBelief, Observation, ProcessNoise};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Iknap,
    #[serde(rename = "broadcast")]
    BroadcastBaseline,
    NoComm,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::Iknap, SchemeKind::BroadcastBaseline, SchemeKind::NoComm];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Iknap => "iknap",
            SchemeKind::BroadcastBaseline => "broadcast",
            SchemeKind::NoComm => "no_comm",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "iknap" => Ok(SchemeKind::Iknap),
            "broadcast" | "broadcast_baseline" => Ok(SchemeKind::BroadcastBaseline),
            "no_comm" | "none" => Ok(SchemeKind::NoComm),
            other => Err(format!(
                "unknown scheme `{other}` (expected iknap, broadcast or no_comm)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpochLog {
    pub time: f64,
    pub candidate_count: usize,
    /// Number of pairwise deliveries made.
    pub chosen_count: usize,
    pub bandwidth_used: u32,
    /// Wall-clock seconds spent scoring candidates and selecting among them.
    pub optimizer_time: f64,
    /// Sum of candidate utilities over delivered messages.
    pub delivered_utility: f64,
}

/// A scheme's choice over a candidate list.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub chosen: Vec<bool>,
    pub bandwidth_used: u32,
    pub delivered_utility: f64,
}

/// Broadcast baseline: every (sender, subject) message goes to all other
/// agents at the sum of the pairwise costs. Broadcasts are taken in
/// descending order of summed utility, skipping any whose full cost no
/// longer fits. Cost never influences the order.
pub fn broadcast_select(candidates: &[CandidateComm], budget: u32) -> Selection {
    // candidates for one broadcast are contiguous in enumeration order
    let mut groups: Vec<(usize, usize, f64, u32)> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if candidates[g.0].sender == c.sender && candidates[g.0].subject == c.subject => {
                g.1 = i + 1;
                g.2 += c.utility;
                g.3 += c.bandwidth;
            }
            _ => groups.push((i, i + 1, c.utility, c.bandwidth)),
        }
    }
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&x, &y| groups[y].2.total_cmp(&groups[x].2).then(x.cmp(&y)));

    let mut chosen = vec![false; candidates.len()];
    let mut remaining = budget;
    let mut delivered_utility = 0.0;
    for g in order {
        let (lo, hi, u, cost) = groups[g];
        if u <= 0.0 || cost > remaining {
            continue;
        }
        remaining -= cost;
        delivered_utility += u;
        chosen[lo..hi].iter_mut().for_each(|c| *c = true);
    }
    Selection {
        chosen,
        bandwidth_used: budget - remaining,
        delivered_utility,
    }
}

/// Exact pairwise selection.
pub fn iknap_select(candidates: &[CandidateComm], budget: u32, epsilon: f64) -> Selection {
    let r = solve_knapsack_pruned(candidates, budget, epsilon);
    Selection {
        chosen: r.chosen,
        bandwidth_used: r.total_bandwidth,
        delivered_utility: r.total_utility,
    }
}

pub fn select(scheme: SchemeKind, candidates: &[CandidateComm], budget: u32, epsilon: f64) -> Selection {
    match scheme {
        SchemeKind::Iknap => iknap_select(candidates, budget, epsilon),
        SchemeKind::BroadcastBaseline => broadcast_select(candidates, budget),
        SchemeKind::NoComm => Selection {
            chosen: vec![false; candidates.len()],
            bandwidth_used: 0,
            delivered_utility: 0.0,
        },
    }
}

/// Everything the broker sees in one epoch.
pub struct EpochInput<'a> {
    pub scheme: SchemeKind,
    /// Freshest observation per subject for each agent, in subject order.
    pub uploads: &'a [Vec<Observation>],
    pub agents: &'a [AgentSnapshot<'a>],
    pub bandwidth: &'a BandwidthMatrix,
    pub budget: u32,
    pub utility_epsilon: f64,
    pub scoring: ScoringContext,
}

/// Runs one epoch and fuses the delivered observations into `beliefs` in
/// candidate order. `on_candidates` sees the scored candidate list before
/// selection.
pub fn run_epoch(
    input: &EpochInput<'_>,
    beliefs: &mut [Vec<GaussianBelief>],
    on_candidates: &mut dyn FnMut(&[CandidateComm], u32),
) -> EpochLog {
    let mut log = EpochLog {
        time: input.scoring.now,
        ..EpochLog::default()
    };
    if input.scheme == SchemeKind::NoComm {
        return log;
    }

    let started = Instant::now();
    let candidates = enumerate_candidates(input.uploads, beliefs, input.agents, input.bandwidth, &input.scoring);
    let selection = select(input.scheme, &candidates, input.budget, input.utility_epsilon);
    log.optimizer_time = started.elapsed().as_secs_f64();
    on_candidates(&candidates, input.budget);

    assert!(
        selection.bandwidth_used <= input.budget,
        "epoch at t={} used {} of {} bandwidth units",
        log.time,
        selection.bandwidth_used,
        input.budget
    );
    log.candidate_count = candidates.len();
    log.bandwidth_used = selection.bandwidth_used;
    log.delivered_utility = selection.delivered_utility;
    deliver(
        &candidates,
        &selection.chosen,
        input.uploads,
        beliefs,
        input.scoring.noise,
    );
    log.chosen_count = selection.chosen.iter().filter(|&&c| c).count();
    log
}

fn deliver(
    candidates: &[CandidateComm],
    chosen: &[bool],
    uploads: &[Vec<Observation>],
    beliefs: &mut [Vec<GaussianBelief>],
    noise: ProcessNoise,
) {
    for (c, _) in candidates.iter().zip(chosen).filter(|(_, &on)| on) {
        let obs = uploads[c.sender]
            .iter()
            .find(|o| o.subject == c.subject)
            .expect("candidate refers to an uploaded observation");
        let b = &mut beliefs[c.receiver][c.subject];
        *b = assimilate(b, obs, noise);
    }
}
