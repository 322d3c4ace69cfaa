//! Planar vectors, wall segments and the segment predicates used by
//! visibility, planning and scenario generation.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A 2D vector in meters (positions) or m/s (velocities).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn distance_squared(self, other: Vec2) -> f64 {
        (self - other).norm_squared()
    }

    /// Unit vector in the same direction, or zero for the zero vector.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            Vec2::ZERO
        }
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// Rescales so the norm does not exceed `max_norm`.
    pub fn clamp_norm(self, max_norm: f64) -> Vec2 {
        let n = self.norm();
        if n > max_norm && n > 0.0 {
            self * (max_norm / n)
        } else {
            self
        }
    }

    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A static wall, modeled as a line segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub endpoint_a: Vec2,
    pub endpoint_b: Vec2,
}

impl Wall {
    pub fn new(endpoint_a: Vec2, endpoint_b: Vec2) -> Self {
        debug_assert!(endpoint_a != endpoint_b, "degenerate wall");
        Self { endpoint_a, endpoint_b }
    }

    pub fn length(&self) -> f64 {
        self.endpoint_a.distance(self.endpoint_b)
    }

    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        point_segment_distance(p, self.endpoint_a, self.endpoint_b)
    }

    pub fn distance_to_segment(&self, a: Vec2, b: Vec2) -> f64 {
        segment_distance(a, b, self.endpoint_a, self.endpoint_b)
    }

    pub fn intersects(&self, a: Vec2, b: Vec2) -> bool {
        segment_intersects(a, b, self.endpoint_a, self.endpoint_b)
    }
}

/// Sign of the orientation of the triple (a, b, c): +1 counter-clockwise,
/// -1 clockwise, 0 collinear.
fn orientation(a: Vec2, b: Vec2, c: Vec2) -> i8 {
    let v = (b - a).cross(c - a);
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// For collinear p, q, r: is q inside the bounding box of p-r.
fn on_segment(p: Vec2, q: Vec2, r: Vec2) -> bool {
    q.x <= p.x.max(r.x) && q.x >= p.x.min(r.x) && q.y <= p.y.max(r.y) && q.y >= p.y.min(r.y)
}

/// True iff the closed segments `seg1_a-seg1_b` and `seg2_a-seg2_b` share a point.
pub fn segment_intersects(seg1_a: Vec2, seg1_b: Vec2, seg2_a: Vec2, seg2_b: Vec2) -> bool {
    let o1 = orientation(seg1_a, seg1_b, seg2_a);
    let o2 = orientation(seg1_a, seg1_b, seg2_b);
    let o3 = orientation(seg2_a, seg2_b, seg1_a);
    let o4 = orientation(seg2_a, seg2_b, seg1_b);

    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(seg1_a, seg2_a, seg1_b))
        || (o2 == 0 && on_segment(seg1_a, seg2_b, seg1_b))
        || (o3 == 0 && on_segment(seg2_a, seg1_a, seg2_b))
        || (o4 == 0 && on_segment(seg2_a, seg1_b, seg2_b))
}

/// Euclidean distance from `p` to the closed segment `a-b`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Minimum distance between two closed segments.
pub fn segment_distance(a1: Vec2, b1: Vec2, a2: Vec2, b2: Vec2) -> f64 {
    if segment_intersects(a1, b1, a2, b2) {
        return 0.0;
    }
    point_segment_distance(a1, a2, b2)
        .min(point_segment_distance(b1, a2, b2))
        .min(point_segment_distance(a2, a1, b1))
        .min(point_segment_distance(b2, a1, b1))
}
