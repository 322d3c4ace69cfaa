//! Brute-force and numerical cross-checks of the core computations, run by
//! the `oracle` subcommand.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Vec2;
use crate::knapsack::{solve_knapsack, CandidateComm};
use crate::perception::{fuse, kl_divergence, GaussianBelief, Kinematic, Observation};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} cases, {} failures, max error {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures,
            self.max_error,
            self.tolerance
        )
    }
}

/// Best subset utility by exhaustive enumeration.
pub fn brute_force_knapsack(items: &[CandidateComm], budget: u32) -> f64 {
    assert!(items.len() <= 24, "exhaustive search over {} items", items.len());
    let mut best = 0.0f64;
    for mask in 0u32..(1u32 << items.len()) {
        let (mut w, mut u) = (0u32, 0.0);
        for (i, c) in items.iter().enumerate() {
            if mask & (1 << i) != 0 {
                w += c.bandwidth;
                u += c.utility;
            }
        }
        if w <= budget {
            best = best.max(u);
        }
    }
    best
}

pub fn random_knapsack_instance<R: Rng>(rng: &mut R, max_items: usize, max_budget: u32) -> (Vec<CandidateComm>, u32) {
    let n = rng.random_range(0..=max_items);
    let items = (0..n)
        .map(|i| CandidateComm {
            sender: i % 3,
            receiver: (i % 3) + 1,
            subject: i,
            bandwidth: rng.random_range(1..=10),
            utility: rng.random_range(0.0..10.0),
        })
        .collect();
    (items, rng.random_range(0..=max_budget))
}

pub fn knapsack_optimality(instances: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tolerance = 1e-9;
    let mut report = OracleReport {
        name: "knapsack vs exhaustive search",
        cases: instances,
        failures: 0,
        max_error: 0.0,
        tolerance,
    };
    for _ in 0..instances {
        let (items, budget) = random_knapsack_instance(&mut rng, 15, 50);
        let r = solve_knapsack(&items, budget);
        let best = brute_force_knapsack(&items, budget);
        let err = (r.total_utility - best).abs() / best.max(1.0);
        report.max_error = report.max_error.max(err);
        if err > tolerance || r.total_bandwidth > budget {
            report.failures += 1;
        }
    }
    report
}

fn random_belief<R: Rng>(rng: &mut R) -> GaussianBelief {
    let mut r = |lo: f64, hi: f64| rng.random_range(lo..hi);
    GaussianBelief {
        owner: 0,
        subject: 0,
        mean: Kinematic::new(
            Vec2::new(r(-5.0, 5.0), r(-5.0, 5.0)),
            Vec2::new(r(-2.0, 2.0), r(-2.0, 2.0)),
        ),
        variance: Kinematic::new(
            Vec2::new(r(1e-3, 10.0), r(1e-3, 10.0)),
            Vec2::new(r(1e-3, 10.0), r(1e-3, 10.0)),
        ),
        last_update: 0.0,
        informed: true,
    }
}

/// Posterior precision against prior plus observation precision per axis.
pub fn fusion_precision(cases: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tolerance = 1e-12;
    let mut report = OracleReport {
        name: "fusion precision additivity",
        cases,
        failures: 0,
        max_error: 0.0,
        tolerance,
    };
    for _ in 0..cases {
        let prior = random_belief(&mut rng);
        let sig = [(); 4].map(|_| rng.random_range(1e-3..5.0));
        let obs = Observation {
            observer: 1,
            subject: 0,
            time: 0.0,
            mean: Kinematic::new(
                Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)),
                Vec2::ZERO,
            ),
            perceived_sigma: Kinematic::from_array(sig),
        };
        let post = fuse(&prior, &obs);
        let (pv, qv) = (post.variance.to_array(), prior.variance.to_array());
        let mut failed = false;
        for i in 0..4 {
            let expected = 1.0 / qv[i] + 1.0 / (sig[i] * sig[i]);
            let err = ((1.0 / pv[i]) - expected).abs() / expected;
            report.max_error = report.max_error.max(err);
            failed |= err > tolerance;
        }
        report.failures += usize::from(failed);
    }
    report
}

/// One-dimensional KL(p || q) by composite Simpson quadrature.
pub fn kl_quadrature_1d(pm: f64, pv: f64, qm: f64, qv: f64) -> f64 {
    let ps = pv.sqrt();
    let (lo, hi) = (pm - 12.0 * ps, pm + 12.0 * ps);
    let n = 4000;
    let h = (hi - lo) / n as f64;
    let log_pdf = |x: f64, m: f64, v: f64| -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m).powi(2) / (2.0 * v);
    let f = |x: f64| {
        let lp = log_pdf(x, pm, pv);
        lp.exp() * (lp - log_pdf(x, qm, qv))
    };
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

pub fn kl_vs_quadrature(cases: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tolerance = 1e-3;
    let mut report = OracleReport {
        name: "KL closed form vs quadrature",
        cases,
        failures: 0,
        max_error: 0.0,
        tolerance,
    };
    for _ in 0..cases {
        let p = random_belief(&mut rng);
        let q = random_belief(&mut rng);
        let (pm, pv, qm, qv) = (
            p.mean.to_array(),
            p.variance.to_array(),
            q.mean.to_array(),
            q.variance.to_array(),
        );
        let quad: f64 = (0..4).map(|i| kl_quadrature_1d(pm[i], pv[i], qm[i], qv[i])).sum();
        let err = (kl_divergence(&p, &q) - quad).abs();
        report.max_error = report.max_error.max(err);
        report.failures += usize::from(err > tolerance);
    }
    report
}

pub fn run_all(seed: u64) -> Vec<OracleReport> {
    vec![
        knapsack_optimality(1000, seed),
        fusion_precision(10_000, seed),
        kl_vs_quadrature(100, seed),
    ]
}
