//! Map families as pure step functions on their phase spaces.

pub mod billiard;
pub mod circle_map;
pub mod outer;
pub mod projective;
pub mod symplectic;
pub mod trap;

use serde::{Deserialize, Serialize};

use crate::Result;

pub use billiard::{birkhoff_map, gutkin_defect, puck_map, BirkhoffMap, PuckMap};
pub use circle_map::{circle_map_f, CircleMapF, CircleMapMode};
pub use outer::{outer_map, OuterMap};
pub use projective::{projective_map, projective_reflect, ProjectiveBoundary, ProjectiveStep, ProjectiveTable, Ray, TransverseField};
pub use symplectic::{
    polygon_period, symplectic_map_oval, symplectic_map_polygon, ChordState, PolygonChord, PolygonPoint,
    SymplecticOvalMap,
};
pub use trap::{trap_trace, ParabolaTrap};

/// Birkhoff coordinates: arclength of the impact point in `[0, L)` and the angle from the
/// positive tangent to the outgoing chord, in `(0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub s: f64,
    pub alpha: f64,
}

impl PhasePoint {
    pub fn new(s: f64, alpha: f64) -> Self {
        PhasePoint { s, alpha }
    }
}

/// Image of a cylinder map together with the number of full turns made by the lift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderStep {
    pub point: PhasePoint,
    pub winding: i64,
}

/// A map of the phase cylinder `[0, L) × (0, π)`.
pub trait CylinderMap: Sync {
    fn total_length(&self) -> f64;

    /// Image of a point with `s` in `[0, L)`.
    fn step(&self, p: PhasePoint) -> Result<CylinderStep>;

    /// Image in lifted coordinates: `s` may be any real.
    fn step_lifted(&self, s: f64, alpha: f64) -> Result<(f64, f64)> {
        let l = self.total_length();
        let turns = (s / l).floor();
        let base = s - turns * l;
        let out = self.step(PhasePoint::new(base.clamp(0.0, l * (1.0 - f64::EPSILON)), alpha))?;
        Ok((out.point.s + (out.winding as f64 + turns) * l, out.point.alpha))
    }

    /// True when `(s, α) ↦ (s, π - α)` conjugates the map to its inverse.
    fn time_reversible(&self) -> bool {
        false
    }
}

/// Reduce a lifted arclength to `[0, L)` and report the number of turns removed.
pub(crate) fn reduce_lift(s: f64, length: f64) -> (f64, i64) {
    let turns = (s / length).floor();
    let mut r = s - turns * length;
    let mut w = turns as i64;
    if r >= length {
        r -= length;
        w += 1;
    }
    if r < 0.0 {
        r = 0.0;
    }
    (r, w)
}

/// A map of (a lift of) a two-dimensional phase space in fixed coordinates.
pub trait PlanarMap: Sync {
    fn apply(&self, x: [f64; 2]) -> Result<[f64; 2]>;

    /// Deck translation corresponding to one turn; zero for maps of the plane.
    fn period(&self) -> [f64; 2] {
        [0.0, 0.0]
    }

    /// Typical size of each coordinate, used to scale finite-difference steps.
    fn scale(&self) -> [f64; 2] {
        [1.0, 1.0]
    }

    /// Involution taking a periodic orbit to its time reversal, applied state by state.
    fn reversal(&self, _x: [f64; 2]) -> Option<[f64; 2]> {
        None
    }
}

/// Lifted `(s, α)` coordinates of a cylinder map.
pub struct Lifted<'a, M: CylinderMap + ?Sized>(pub &'a M);

impl<M: CylinderMap + ?Sized> PlanarMap for Lifted<'_, M> {
    fn apply(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let (s, a) = self.0.step_lifted(x[0], x[1])?;
        Ok([s, a])
    }

    fn period(&self) -> [f64; 2] {
        [self.0.total_length(), 0.0]
    }

    fn scale(&self) -> [f64; 2] {
        [self.0.total_length() / std::f64::consts::TAU, 1.0]
    }

    fn reversal(&self, x: [f64; 2]) -> Option<[f64; 2]> {
        self.0.time_reversible().then(|| [x[0], std::f64::consts::PI - x[1]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_lift_wraps_negative_and_large() {
        assert_eq!(reduce_lift(7.0, 3.0), (1.0, 2));
        let (r, w) = reduce_lift(-0.5, 3.0);
        assert!((r - 2.5).abs() < 1e-15 && w == -1);
    }
}
