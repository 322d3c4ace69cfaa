//! Candidate pairwise communications and their exact 0/1 knapsack
//! selection under the per-epoch bandwidth budget.
//!
//! The solver is a weight-indexed dynamic program over capacities `0..=B`
//! in O(N B) time. It keeps two rows of suffix optima plus an N x (B + 1)
//! table of take/skip decisions (O(N B) space, one byte per cell), so the
//! chosen set can be reconstructed with deterministic tie-breaking: among
//! maximum-utility subsets the one with the least total bandwidth wins,
//! then the lexicographically smallest set of candidate indices. Before
//! the DP each bandwidth class is cut to the items that can still appear in
//! that optimum, which bounds the DP's rows by B times a harmonic sum.

use std::time::Instant;

use rand::Rng;

use crate::navigation::PlannedPath;
use crate::perception::{predict_belief, AgentId, GaussianBelief, Observation, ProcessNoise, SubjectId};
use crate::utility::{forward_positions, kappa, tau_from_positions, utility, UtilityParams};

/// A potential transfer of `sender`'s observation of `subject` to `receiver`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateComm {
    pub sender: AgentId,
    pub receiver: AgentId,
    pub subject: SubjectId,
    pub bandwidth: u32,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub chosen: Vec<bool>,
    pub total_utility: f64,
    pub total_bandwidth: u32,
    /// Wall-clock solve time in seconds.
    pub solve_time: f64,
}

impl SelectionResult {
    pub fn chosen_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.chosen.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| i)
    }

    pub fn chosen_count(&self) -> usize {
        self.chosen.iter().filter(|&&c| c).count()
    }
}

/// Bandwidth cost of a single pairwise message.
pub trait BandwidthModel {
    fn cost(&self, sender: AgentId, receiver: AgentId, subject: SubjectId) -> u32;
}

/// Symmetric per-pair costs; every subject's message costs the same.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthMatrix {
    n: usize,
    costs: Vec<u32>,
}

impl BandwidthMatrix {
    pub fn uniform(n: usize, cost: u32) -> Self {
        Self {
            n,
            costs: vec![cost; n * n],
        }
    }

    /// Draws each unordered pair's cost uniformly from `range` (inclusive).
    pub fn sample<R: Rng + ?Sized>(n: usize, range: [u32; 2], rng: &mut R) -> Self {
        let mut m = Self::uniform(n, 0);
        for a in 0..n {
            for b in a + 1..n {
                let c = rng.random_range(range[0]..=range[1]);
                m.set(a, b, c);
            }
        }
        m
    }

    pub fn set(&mut self, a: AgentId, b: AgentId, cost: u32) {
        self.costs[a * self.n + b] = cost;
        self.costs[b * self.n + a] = cost;
    }

    pub fn get(&self, a: AgentId, b: AgentId) -> u32 {
        self.costs[a * self.n + b]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

impl BandwidthModel for BandwidthMatrix {
    fn cost(&self, sender: AgentId, receiver: AgentId, _subject: SubjectId) -> u32 {
        self.get(sender, receiver)
    }
}

/// Integer bandwidth units for a message of `size` in units of `quantum`.
pub fn quantize_bandwidth(size: f64, quantum: f64) -> u32 {
    ((size / quantum).ceil() as u32).max(1)
}

/// What the infrastructure knows about one agent when scoring candidates.
#[derive(Debug, Clone, Copy)]
pub struct AgentSnapshot<'a> {
    pub path: &'a PlannedPath,
    pub progress: f64,
    /// Agents already at their goal are treated as stationary.
    pub finished: bool,
}

/// Shared inputs to candidate scoring for one epoch.
#[derive(Debug, Clone, Copy)]
pub struct ScoringContext {
    pub params: UtilityParams,
    pub noise: ProcessNoise,
    /// Raw kappa is divided by this before weighting.
    pub kappa_scale: f64,
    pub sim_dt: f64,
    pub now: f64,
}

/// One candidate per (sender, receiver, subject) with a fresh upload of the
/// sender about the subject. `uploads[a]` holds agent `a`'s freshest
/// observation per subject; `beliefs[a][h]` is `a`'s belief of `h`.
pub fn enumerate_candidates(
    uploads: &[Vec<Observation>],
    beliefs: &[Vec<GaussianBelief>],
    agents: &[AgentSnapshot<'_>],
    bandwidth: &dyn BandwidthModel,
    ctx: &ScoringContext,
) -> Vec<CandidateComm> {
    let n = agents.len();
    if uploads.iter().all(|u| u.is_empty()) {
        return Vec::new();
    }
    let receiver_positions: Vec<_> = agents
        .iter()
        .map(|a| {
            if a.finished {
                vec![a.path.goal()]
            } else {
                forward_positions(a.path, a.progress, ctx.params.horizon, ctx.sim_dt)
            }
        })
        .collect();

    let mut out = Vec::new();
    for (sender, fresh) in uploads.iter().enumerate() {
        for obs in fresh {
            let h = obs.subject;
            let sender_view = predict_belief(
                &beliefs[sender][h],
                ctx.now.max(beliefs[sender][h].last_update),
                ctx.noise,
            );
            for receiver in (0..n).filter(|&b| b != sender) {
                let k = kappa(obs, &beliefs[receiver][h], ctx.noise) / ctx.kappa_scale;
                let t = tau_from_positions(&receiver_positions[receiver], &sender_view, &ctx.params, ctx.sim_dt);
                out.push(CandidateComm {
                    sender,
                    receiver,
                    subject: h,
                    bandwidth: bandwidth.cost(sender, receiver, h),
                    utility: utility(k, t, &ctx.params),
                });
            }
        }
    }
    out
}

/// At most `cap / beta` items of bandwidth `beta` fit, so within each
/// bandwidth class only the best `cap / beta` items (by utility, then lower
/// index) can appear in the tie-broken optimum: any other member could be
/// swapped for a better-ranked unused member of its class without losing
/// utility, changing bandwidth or growing the index set lexicographically.
/// Returns the surviving indices in their original order.
fn class_limited(candidates: &[CandidateComm], items: Vec<usize>, cap: usize) -> Vec<usize> {
    let beta = |i: usize| candidates[i].bandwidth as usize;
    // counting sort by class; each bucket stays in ascending index order
    let mut start = vec![0usize; cap + 2];
    for &i in &items {
        start[beta(i) + 1] += 1;
    }
    if (1..=cap).all(|b| start[b + 1] <= cap / b) {
        return items;
    }
    for b in 1..=cap + 1 {
        start[b] += start[b - 1];
    }
    let mut fill = start.clone();
    let mut bucketed = vec![0usize; items.len()];
    for &i in &items {
        bucketed[fill[beta(i)]] = i;
        fill[beta(i)] += 1;
    }
    let mut dropped = vec![false; candidates.len()];
    for b in 1..=cap {
        let class = &mut bucketed[start[b]..start[b + 1]];
        let limit = cap / b;
        if class.len() > limit {
            let rank = |&x: &usize, &y: &usize| candidates[y].utility.total_cmp(&candidates[x].utility).then(x.cmp(&y));
            class.select_nth_unstable_by(limit, rank);
            for &i in &class[limit..] {
                dropped[i] = true;
            }
        }
    }
    items.into_iter().filter(|&i| !dropped[i]).collect()
}

/// Exact 0/1 knapsack over all candidates.
pub fn solve_knapsack(candidates: &[CandidateComm], budget: u32) -> SelectionResult {
    solve_knapsack_pruned(candidates, budget, 0.0)
}

/// Exact 0/1 knapsack over the candidates whose utility is at least
/// `epsilon`; the others are never chosen.
pub fn solve_knapsack_pruned(candidates: &[CandidateComm], budget: u32, epsilon: f64) -> SelectionResult {
    let started = Instant::now();
    let cap = budget as usize;
    let items = class_limited(candidates, eligible(candidates, cap, epsilon), cap);
    solve_items(candidates, &items, cap, started)
}

/// [`solve_knapsack_pruned`] without the per-class reduction, so the DP
/// always runs over every eligible candidate. Same optimum; kept as a
/// reference and for timing the plain O(N B) program.
pub fn solve_knapsack_unreduced(candidates: &[CandidateComm], budget: u32, epsilon: f64) -> SelectionResult {
    let started = Instant::now();
    let cap = budget as usize;
    let items = eligible(candidates, cap, epsilon);
    solve_items(candidates, &items, cap, started)
}

fn eligible(candidates: &[CandidateComm], cap: usize, epsilon: f64) -> Vec<usize> {
    (0..candidates.len())
        .filter(|&i| {
            let c = &candidates[i];
            debug_assert!(c.bandwidth >= 1 && c.utility.is_finite() && c.utility >= 0.0);
            c.utility >= epsilon && c.utility > 0.0 && (c.bandwidth as usize) <= cap
        })
        .collect()
}

/// DP over `items` (ascending candidate indices) with capacity `cap`.
fn solve_items(candidates: &[CandidateComm], items: &[usize], cap: usize, started: Instant) -> SelectionResult {
    let width = cap + 1;
    let k = items.len();
    // next/cur: best utility from the remaining suffix of items using
    // exactly w units. take[i * width + w] records whether including item i
    // at capacity w is at least as good as skipping it; preferring
    // inclusion on ties yields the lexicographically smallest index set.
    let mut next = vec![f64::NEG_INFINITY; width];
    next[0] = 0.0;
    let mut cur = vec![0.0; width];
    let mut take = vec![false; k * width];
    for i in (0..k).rev() {
        let c = &candidates[items[i]];
        let beta = c.bandwidth as usize;
        let theta = c.utility;
        let row = &mut take[i * width..(i + 1) * width];
        cur[..beta].copy_from_slice(&next[..beta]);
        let lanes = cur[beta..]
            .iter_mut()
            .zip(&mut row[beta..])
            .zip(next[..width - beta].iter().zip(&next[beta..]));
        for ((out, decision), (&shifted, &without)) in lanes {
            let with = theta + shifted;
            let better = with >= without;
            *decision = better;
            *out = if better { with } else { without };
        }
        std::mem::swap(&mut cur, &mut next);
    }

    // `next` now holds the optimum over all items; the smallest capacity
    // wins among equal utilities
    let mut best_w = 0;
    for w in 1..width {
        if next[w] > next[best_w] {
            best_w = w;
        }
    }

    let mut chosen = vec![false; candidates.len()];
    let mut w = best_w;
    for (i, &idx) in items.iter().enumerate() {
        if take[i * width + w] {
            chosen[idx] = true;
            w -= candidates[idx].bandwidth as usize;
        }
    }
    debug_assert_eq!(w, 0);

    let (total_utility, total_bandwidth) = chosen
        .iter()
        .zip(candidates)
        .filter(|(&c, _)| c)
        .fold((0.0, 0u32), |(u, b), (_, c)| (u + c.utility, b + c.bandwidth));
    SelectionResult {
        chosen,
        total_utility,
        total_bandwidth,
        solve_time: started.elapsed().as_secs_f64(),
    }
}
