//! Natural cubic spline trajectories with an arc-length lookup table.

use rand::Rng;

use crate::geometry::Vec2;

/// Samples per spline segment when building the arc-length table.
const TABLE_SAMPLES_PER_SEGMENT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SplineTrajectory {
    pub control_points: Vec<Vec2>,
    /// Spline knots (cumulative chord length).
    knots: Vec<f64>,
    /// Second derivatives at the knots, per axis.
    second: Vec<Vec2>,
    /// (parameter, arclength) pairs, increasing in both.
    table: Vec<(f64, f64)>,
    pub target_speed: f64,
}

/// Second derivatives of a natural cubic spline through `ys` at knots `ts`
/// (Thomas algorithm on the tridiagonal system).
fn natural_second_derivatives(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = ts.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let k = n - 2;
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for i in 1..n - 1 {
        let h0 = ts[i] - ts[i - 1];
        let h1 = ts[i + 1] - ts[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
    }
    // lower[i] = h_i = ts[i+1] - ts[i] for row i (coefficient of m_i in row i+1)
    for i in 1..k {
        let lower = ts[i + 1] - ts[i];
        let w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for i in (0..k - 1).rev() {
        m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
    }
    m
}

impl SplineTrajectory {
    /// Natural cubic spline through `points`, parameterized by chord length.
    pub fn through(points: Vec<Vec2>, target_speed: f64) -> Self {
        assert!(points.len() >= 2, "spline needs at least two points");
        let mut knots = vec![0.0];
        for w in points.windows(2) {
            let h = w[0].distance(w[1]);
            assert!(h > 0.0, "coincident spline control points");
            knots.push(knots.last().unwrap() + h);
        }
        let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
        let mx = natural_second_derivatives(&knots, &xs);
        let my = natural_second_derivatives(&knots, &ys);
        let second = mx.into_iter().zip(my).map(|(x, y)| Vec2::new(x, y)).collect();

        let mut spline = Self {
            control_points: points,
            knots,
            second,
            table: Vec::new(),
            target_speed,
        };
        spline.build_table();
        spline
    }

    fn build_table(&mut self) {
        let segments = self.knots.len() - 1;
        let mut table = Vec::with_capacity(segments * TABLE_SAMPLES_PER_SEGMENT + 1);
        let mut prev = self.position_at_param(0.0);
        let mut acc = 0.0;
        table.push((0.0, 0.0));
        for seg in 0..segments {
            let (t0, t1) = (self.knots[seg], self.knots[seg + 1]);
            for j in 1..=TABLE_SAMPLES_PER_SEGMENT {
                let t = t0 + (t1 - t0) * j as f64 / TABLE_SAMPLES_PER_SEGMENT as f64;
                let p = self.position_at_param(t);
                acc += p.distance(prev);
                prev = p;
                table.push((t, acc));
            }
        }
        self.table = table;
    }

    fn segment(&self, t: f64) -> usize {
        let idx = self.knots.partition_point(|&k| k <= t);
        idx.saturating_sub(1).min(self.knots.len() - 2)
    }

    fn param_end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// Position at spline parameter `t` (clamped to the knot range).
    pub fn position_at_param(&self, t: f64) -> Vec2 {
        let t = t.clamp(0.0, self.param_end());
        let i = self.segment(t);
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let h = t1 - t0;
        let (a, b) = ((t1 - t) / h, (t - t0) / h);
        let (p0, p1) = (self.control_points[i], self.control_points[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        p0 * a + p1 * b + (m0 * (a * a * a - a) + m1 * (b * b * b - b)) * (h * h / 6.0)
    }

    /// First derivative with respect to the spline parameter.
    pub fn derivative_at_param(&self, t: f64) -> Vec2 {
        let t = t.clamp(0.0, self.param_end());
        let i = self.segment(t);
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let h = t1 - t0;
        let (a, b) = ((t1 - t) / h, (t - t0) / h);
        let (p0, p1) = (self.control_points[i], self.control_points[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        (p1 - p0) / h + (m1 * (3.0 * b * b - 1.0) - m0 * (3.0 * a * a - 1.0)) * (h / 6.0)
    }

    /// Second derivative with respect to the spline parameter.
    pub fn second_derivative_at_param(&self, t: f64) -> Vec2 {
        let t = t.clamp(0.0, self.param_end());
        let i = self.segment(t);
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let h = t1 - t0;
        self.second[i] * ((t1 - t) / h) + self.second[i + 1] * ((t - t0) / h)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn length(&self) -> f64 {
        self.table.last().unwrap().1
    }

    fn param_at_arclength(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.length());
        let idx = self.table.partition_point(|&(_, a)| a < s);
        if idx == 0 {
            return 0.0;
        }
        let (t0, s0) = self.table[idx - 1];
        let (t1, s1) = self.table[idx.min(self.table.len() - 1)];
        if s1 > s0 {
            t0 + (t1 - t0) * (s - s0) / (s1 - s0)
        } else {
            t1
        }
    }

    /// Position at arclength `s`.
    pub fn point_at(&self, s: f64) -> Vec2 {
        self.position_at_param(self.param_at_arclength(s))
    }

    /// Unit tangent at arclength `s`.
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        self.derivative_at_param(self.param_at_arclength(s)).normalized()
    }

    pub fn start(&self) -> Vec2 {
        self.control_points[0]
    }

    pub fn goal(&self) -> Vec2 {
        *self.control_points.last().unwrap()
    }
}

/// Random subject trajectory: a natural spline from `start` through a random
/// number (in `interior_points`) of uniform points of the field to `goal`,
/// with a uniform target speed in `speed_range`.
pub fn generate_subject_trajectory<R: Rng + ?Sized>(
    start: Vec2,
    goal: Vec2,
    field_size: f64,
    interior_points: [usize; 2],
    speed_range: [f64; 2],
    rng: &mut R,
) -> SplineTrajectory {
    debug_assert!(start != goal);
    let count = rng.random_range(interior_points[0]..=interior_points[1]);
    let mut points = Vec::with_capacity(count + 2);
    points.push(start);
    for _ in 0..count {
        let p = Vec2::new(rng.random_range(0.0..field_size), rng.random_range(0.0..field_size));
        if points.last().is_some_and(|q| q.distance(p) > 1e-6) && p.distance(goal) > 1e-6 {
            points.push(p);
        }
    }
    points.push(goal);
    let speed = if speed_range[1] > speed_range[0] {
        rng.random_range(speed_range[0]..=speed_range[1])
    } else {
        speed_range[0]
    };
    SplineTrajectory::through(points, speed)
}
