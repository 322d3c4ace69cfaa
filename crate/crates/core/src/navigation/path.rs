//! Wall-wrapping polyline paths over a visibility graph.

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, Vec2, Wall};

/// Vertices are placed on a diamond circumscribing the clearance disc
/// around each wall endpoint, pushed out by this factor so that edges
/// between neighbouring vertices keep strictly more than the clearance.
const VERTEX_SLACK: f64 = 1.01;

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    pub waypoints: Vec<Vec2>,
    /// Arc length at each waypoint; `cumulative[0] == 0`.
    cumulative: Vec<f64>,
    pub total_length: f64,
    pub target_speed: f64,
}

impl PlannedPath {
    pub fn from_waypoints(waypoints: Vec<Vec2>, target_speed: f64) -> Self {
        assert!(!waypoints.is_empty());
        let mut cumulative = Vec::with_capacity(waypoints.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for pair in waypoints.windows(2) {
            acc += pair[0].distance(pair[1]);
            cumulative.push(acc);
        }
        Self {
            waypoints,
            cumulative,
            total_length: acc,
            target_speed,
        }
    }

    pub fn start(&self) -> Vec2 {
        self.waypoints[0]
    }

    pub fn goal(&self) -> Vec2 {
        *self.waypoints.last().unwrap()
    }

    fn segment_index(&self, s: f64) -> usize {
        if self.waypoints.len() < 2 {
            return 0;
        }
        // last segment whose start arclength is <= s
        let idx = self.cumulative.partition_point(|&c| c <= s);
        idx.saturating_sub(1).min(self.waypoints.len() - 2)
    }

    /// Point at arclength `s`, clamped to the path.
    pub fn point_at(&self, s: f64) -> Vec2 {
        if self.waypoints.len() < 2 {
            return self.waypoints[0];
        }
        let s = s.clamp(0.0, self.total_length);
        let i = self.segment_index(s);
        let len = self.cumulative[i + 1] - self.cumulative[i];
        let t = if len > 0.0 { (s - self.cumulative[i]) / len } else { 0.0 };
        self.waypoints[i].lerp(self.waypoints[i + 1], t)
    }

    /// Unit tangent at arclength `s` (zero for a single-point path).
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        if self.waypoints.len() < 2 {
            return Vec2::ZERO;
        }
        let i = self.segment_index(s.clamp(0.0, self.total_length));
        (self.waypoints[i + 1] - self.waypoints[i]).normalized()
    }

    /// Arclength of the point on the path closest to `p`, searching only
    /// ahead of `from` (up to `window` meters). Never returns less than `from`.
    pub fn project(&self, p: Vec2, from: f64, window: f64) -> f64 {
        if self.waypoints.len() < 2 {
            return 0.0;
        }
        let from = from.clamp(0.0, self.total_length);
        let until = (from + window).min(self.total_length);
        let mut best = (f64::INFINITY, from);
        for i in self.segment_index(from)..self.waypoints.len() - 1 {
            let (s0, s1) = (self.cumulative[i], self.cumulative[i + 1]);
            if s0 > until {
                break;
            }
            let (a, b) = (self.waypoints[i], self.waypoints[i + 1]);
            let ab = b - a;
            let len2 = ab.norm_squared();
            let t = if len2 > 0.0 {
                ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let s = (s0 + t * (s1 - s0)).clamp(from, until);
            let d = p.distance_squared(self.point_at(s));
            if d < best.0 {
                best = (d, s);
            }
        }
        best.1
    }

    /// Smallest distance from any path segment to any wall.
    pub fn wall_clearance(&self, walls: &[Wall]) -> f64 {
        self.waypoints
            .windows(2)
            .flat_map(|seg| walls.iter().map(move |w| w.distance_to_segment(seg[0], seg[1])))
            .fold(f64::INFINITY, f64::min)
    }
}

fn point_clear(p: Vec2, walls: &[Wall], clearance: f64) -> bool {
    walls
        .iter()
        .all(|w| point_segment_distance(p, w.endpoint_a, w.endpoint_b) >= clearance)
}

fn edge_clear(a: Vec2, b: Vec2, walls: &[Wall], clearance: f64) -> bool {
    walls.iter().all(|w| w.distance_to_segment(a, b) >= clearance)
}

/// Candidate detour vertices: for each wall endpoint, one point straight
/// out along the wall axis and one on either side of it.
fn detour_vertices(walls: &[Wall], clearance: f64) -> Vec<Vec2> {
    let r = clearance * std::f64::consts::SQRT_2 * VERTEX_SLACK;
    let mut out = Vec::with_capacity(walls.len() * 6);
    for w in walls {
        for (end, other) in [(w.endpoint_a, w.endpoint_b), (w.endpoint_b, w.endpoint_a)] {
            let axis = (end - other).normalized();
            let side = axis.perp();
            out.push(end + axis * r);
            out.push(end + side * r);
            out.push(end - side * r);
        }
    }
    out
}

/// Shortest polyline from `start` to `goal` whose segments all keep at
/// least `clearance` from every wall.
pub fn plan_path(start: Vec2, goal: Vec2, walls: &[Wall], clearance: f64, target_speed: f64) -> Result<PlannedPath> {
    if start == goal {
        return Ok(PlannedPath::from_waypoints(vec![start], target_speed));
    }
    if edge_clear(start, goal, walls, clearance) {
        return Ok(PlannedPath::from_waypoints(vec![start, goal], target_speed));
    }
    let fail = || Error::PlanningFailure { start, goal };
    if !point_clear(start, walls, clearance) || !point_clear(goal, walls, clearance) {
        return Err(fail());
    }

    let mut nodes = vec![start, goal];
    nodes.extend(
        detour_vertices(walls, clearance)
            .into_iter()
            .filter(|&p| point_clear(p, walls, clearance)),
    );
    let n = nodes.len();

    // Dense Dijkstra; edges are checked lazily as nodes are settled.
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    dist[0] = 0.0;
    loop {
        let mut u = usize::MAX;
        for i in 0..n {
            if !done[i] && dist[i].is_finite() && (u == usize::MAX || dist[i] < dist[u]) {
                u = i;
            }
        }
        if u == usize::MAX {
            return Err(fail());
        }
        if u == 1 {
            break;
        }
        done[u] = true;
        for v in 0..n {
            if done[v] {
                continue;
            }
            let cand = dist[u] + nodes[u].distance(nodes[v]);
            if cand < dist[v] && edge_clear(nodes[u], nodes[v], walls, clearance) {
                dist[v] = cand;
                prev[v] = u;
            }
        }
    }

    let mut waypoints = vec![goal];
    let mut cur = 1;
    while cur != 0 {
        cur = prev[cur];
        waypoints.push(nodes[cur]);
    }
    waypoints.reverse();
    Ok(PlannedPath::from_waypoints(waypoints, target_speed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn unobstructed_is_straight() {
        let p = plan_path(v(0.0, 0.0), v(10.0, 5.0), &[], 0.75, 1.5).unwrap();
        assert_eq!(p.waypoints, vec![v(0.0, 0.0), v(10.0, 5.0)]);
        assert!((p.total_length - 125f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn perpendicular_wall_detours_round_nearer_end() {
        let walls = [Wall::new(v(0.0, -1.0), v(0.0, 3.0))];
        let p = plan_path(v(-5.0, 0.0), v(5.0, 0.0), &walls, 0.75, 1.5).unwrap();
        assert_eq!(p.waypoints.len(), 3);
        assert!(
            p.waypoints[1].y < -1.0,
            "detour should pass the lower end: {:?}",
            p.waypoints
        );
        assert!(p.wall_clearance(&walls) >= 0.75);
    }

    #[test]
    fn enclosed_goal_fails() {
        let walls = [
            Wall::new(v(-2.0, -2.0), v(2.0, -2.0)),
            Wall::new(v(2.0, -2.0), v(2.0, 2.0)),
            Wall::new(v(2.0, 2.0), v(-2.0, 2.0)),
            Wall::new(v(-2.0, 2.0), v(-2.0, -2.0)),
        ];
        let r = plan_path(v(10.0, 0.0), v(0.0, 0.0), &walls, 0.5, 1.0);
        assert!(matches!(r, Err(Error::PlanningFailure { .. })));
    }

    #[test]
    fn goal_inside_clearance_fails() {
        let walls = [Wall::new(v(0.0, -1.0), v(0.0, 1.0))];
        assert!(plan_path(v(-5.0, 0.0), v(0.2, 0.0), &walls, 0.5, 1.0).is_err());
    }

    #[test]
    fn arclength_queries() {
        let p = PlannedPath::from_waypoints(vec![v(0.0, 0.0), v(3.0, 0.0), v(3.0, 4.0)], 1.0);
        assert_eq!(p.total_length, 7.0);
        assert_eq!(p.point_at(1.0), v(1.0, 0.0));
        assert_eq!(p.point_at(5.0), v(3.0, 2.0));
        assert_eq!(p.point_at(99.0), v(3.0, 4.0));
        assert_eq!(p.point_at(-1.0), v(0.0, 0.0));
        assert_eq!(p.tangent_at(4.0), v(0.0, 1.0));
        assert!((p.project(v(1.5, 0.2), 0.0, 10.0) - 1.5).abs() < 1e-12);
        assert!((p.project(v(3.2, 1.0), 0.0, 10.0) - 4.0).abs() < 1e-12);
        // never goes backwards
        assert_eq!(p.project(v(0.0, 0.0), 2.0, 10.0), 2.0);
    }

    #[test]
    fn single_point_path() {
        let p = plan_path(v(1.0, 1.0), v(1.0, 1.0), &[], 0.5, 1.0).unwrap();
        assert_eq!(p.total_length, 0.0);
        assert_eq!(p.point_at(3.0), v(1.0, 1.0));
        assert_eq!(p.tangent_at(0.0), Vec2::ZERO);
    }
}
