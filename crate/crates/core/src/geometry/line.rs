use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::vec2::{normalize_angle, Vec2};

/// Oriented line `{x : cross(u, x) = p}` with `u = (cos φ, sin φ)`.
///
/// `p` is the signed distance from the origin, positive when the origin lies to the right of
/// the line. `(φ, p)` and `(φ + π, -p)` are the same point set with opposite orientations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedLine {
    pub phi: f64,
    pub p: f64,
}

impl OrientedLine {
    pub fn new(phi: f64, p: f64) -> Self {
        OrientedLine { phi: normalize_angle(phi), p }
    }

    pub fn through(point: Vec2, direction: Vec2) -> Self {
        let u = direction.normalized();
        OrientedLine::new(u.angle(), u.cross(point))
    }

    pub fn direction(&self) -> Vec2 {
        Vec2::from_angle(self.phi)
    }

    /// Foot of the perpendicular from the origin.
    pub fn base_point(&self) -> Vec2 {
        self.direction().perp() * self.p
    }

    /// Positive for points to the left of the line.
    pub fn signed_distance(&self, x: Vec2) -> f64 {
        self.direction().cross(x) - self.p
    }

    pub fn reversed(&self) -> Self {
        OrientedLine::new(self.phi + PI, -self.p)
    }

    pub fn intersection(&self, other: &OrientedLine) -> Option<Vec2> {
        let (u, w) = (self.direction(), other.direction());
        let det = u.cross(w);
        if det.abs() < 1e-15 {
            return None;
        }
        // x = α u + β w with cross(u, x) = β det = p1 and cross(w, x) = -α det = p2
        Some(w * (self.p / det) - u * (other.p / det))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reversal_is_distinct_but_same_set() {
        let l = OrientedLine::through(Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0));
        assert!((l.p - 1.0).abs() < 1e-15);
        let r = l.reversed();
        assert!((r.phi - PI).abs() < 1e-15 && (r.p + 1.0).abs() < 1e-15);
        assert!(r.signed_distance(Vec2::new(3.0, 1.0)).abs() < 1e-15);
        assert!(l.base_point().distance(Vec2::new(0.0, 1.0)) < 1e-15);
    }

    #[test]
    fn intersection_of_axes() {
        let a = OrientedLine::through(Vec2::new(2.0, 3.0), Vec2::new(1.0, 0.0));
        let b = OrientedLine::through(Vec2::new(2.0, 3.0), Vec2::new(1.0, 1.0));
        let x = a.intersection(&b).unwrap();
        assert!(x.distance(Vec2::new(2.0, 3.0)) < 1e-14);
        assert!(a.intersection(&a.reversed()).is_none());
    }
}
