use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geometry::oval::lift_after;
use crate::geometry::{Oval, PolygonTable};
use crate::maps::PlanarMap;
use crate::vec2::{normalize_angle, Vec2};
use crate::{Error, Result, GRAZING_SINE};

/// Chord from parameter `x` to parameter `y`, lifted so that `x < y < x + 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordState {
    pub x: f64,
    pub y: f64,
}

impl ChordState {
    pub fn new(x: f64, y: f64) -> Self {
        ChordState { x, y: lift_after(y, x) }
    }
}

/// Symplectic billiard step `xy ↦ yz`, where `xz` is parallel to the tangent at `y`.
pub fn symplectic_map_oval(oval: &Oval, c: ChordState) -> Result<ChordState> {
    let gap = normalize_angle(c.y - c.x);
    if gap < 1e-12 || TAU - gap < 1e-12 {
        return Err(Error::DegenerateChord(format!("chord endpoints coincide (x = {}, y = {})", c.x, c.y)));
    }
    let tx = oval.unit_tangent(c.x);
    let mut u = oval.unit_tangent(c.y);
    let sine = tx.cross(u);
    if sine.abs() < GRAZING_SINE {
        return Err(Error::DegenerateChord(format!(
            "tangents at x = {} and y = {} are parallel",
            c.x, c.y
        )));
    }
    if sine < 0.0 {
        u = -u;
    }
    let z = oval.second_intersection(c.x, u.angle())?;
    Ok(ChordState { x: c.y, y: lift_after(z, c.y) })
}

pub struct SymplecticOvalMap<'a> {
    pub oval: &'a Oval,
}

impl PlanarMap for SymplecticOvalMap<'_> {
    fn apply(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let next = symplectic_map_oval(self.oval, ChordState { x: x[0], y: x[1] })?;
        Ok([next.x, next.y])
    }

    fn period(&self) -> [f64; 2] {
        [TAU, TAU]
    }
}

/// Point on edge `edge` at fraction `u` of the way from its first vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonPoint {
    pub edge: usize,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonChord {
    pub x: PolygonPoint,
    pub y: PolygonPoint,
}

fn check_point(table: &PolygonTable, p: PolygonPoint) -> Result<Vec2> {
    if p.edge >= table.len() || !(0.0..=1.0).contains(&p.u) {
        return Err(Error::InvalidArgument(format!("point (edge {}, u = {}) is not on the boundary", p.edge, p.u)));
    }
    let q = table.point_on_edge(p.edge, p.u);
    if let Some(vertex) = table.near_vertex(q) {
        return Err(Error::VertexHit { vertex });
    }
    Ok(q)
}

/// Polygonal symplectic billiard step: `z` is the other boundary point on the line through
/// `x` parallel to the edge containing `y`.
pub fn symplectic_map_polygon(table: &PolygonTable, c: PolygonChord) -> Result<PolygonChord> {
    if !table.is_convex() {
        return Err(Error::InvalidCurve("symplectic billiards need a convex polygon".into()));
    }
    let px = check_point(table, c.x)?;
    check_point(table, c.y)?;
    let dir = table.edge_vector(c.y.edge);
    let ex = table.edge_vector(c.x.edge);
    if ex.cross(dir).abs() <= 1e-12 * ex.norm() * dir.norm() {
        return Err(Error::DegenerateChord(format!(
            "edges {} and {} are parallel",
            c.x.edge, c.y.edge
        )));
    }
    let tiny = 1e-12 * table.diameter();
    let hit = table
        .line_hits(px, dir)
        .into_iter()
        .filter(|h| h.lambda.abs() * dir.norm() > tiny)
        .max_by(|a, b| a.lambda.abs().total_cmp(&b.lambda.abs()))
        .ok_or_else(|| Error::DegenerateChord("line through x meets the boundary only at x".into()))?;
    if let Some(vertex) = table.near_vertex(hit.point) {
        return Err(Error::VertexHit { vertex });
    }
    Ok(PolygonChord { x: c.y, y: PolygonPoint { edge: hit.edge, u: hit.u } })
}

/// First return of a polygonal symplectic orbit to its initial chord.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolygonPeriod {
    pub period: usize,
    pub recurrence_error: f64,
}

/// Iterate until both chord endpoints come back within `tol`; `None` if no return happens
/// within `max_steps`.
pub fn polygon_period(
    table: &PolygonTable,
    start: PolygonChord,
    max_steps: usize,
    tol: f64,
) -> Result<Option<PolygonPeriod>> {
    let ex = table.edge_vector(start.x.edge);
    let ey = table.edge_vector(start.y.edge);
    if start.x.edge == start.y.edge || ex.cross(ey).abs() <= 1e-12 * ex.norm() * ey.norm() {
        return Err(Error::DegenerateChord("initial chord joins parallel edges".into()));
    }
    let (x0, y0) = (check_point(table, start.x)?, check_point(table, start.y)?);
    let mut c = start;
    for k in 1..=max_steps {
        c = symplectic_map_polygon(table, c)?;
        let px = table.point_on_edge(c.x.edge, c.x.u);
        let py = table.point_on_edge(c.y.edge, c.y.u);
        let err = px.distance(x0).max(py.distance(y0));
        if err < tol {
            return Ok(Some(PolygonPeriod { period: k, recurrence_error: err }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_doubles_the_arc() {
        let c = Oval::circle(1.0).unwrap();
        let next = symplectic_map_oval(&c, ChordState::new(0.3, 1.1)).unwrap();
        assert!((next.x - 1.1).abs() < 1e-15);
        assert!((next.y - 1.9).abs() < 1e-13);
    }

    #[test]
    fn parallel_tangents_are_degenerate() {
        let c = Oval::circle(1.0).unwrap();
        assert!(matches!(
            symplectic_map_oval(&c, ChordState::new(0.0, PI)),
            Err(Error::DegenerateChord(_))
        ));
    }

    #[test]
    fn unit_square_example() {
        let sq = PolygonTable::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let c = PolygonChord { x: PolygonPoint { edge: 0, u: 0.3 }, y: PolygonPoint { edge: 1, u: 0.4 } };
        let next = symplectic_map_polygon(&sq, c).unwrap();
        assert_eq!(next.y.edge, 2);
        let z = sq.point_on_edge(next.y.edge, next.y.u);
        assert!(z.distance(Vec2::new(0.3, 1.0)) < 1e-15);
    }

    #[test]
    fn parallel_initial_edges_rejected() {
        let sq = PolygonTable::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let c = PolygonChord { x: PolygonPoint { edge: 0, u: 0.3 }, y: PolygonPoint { edge: 2, u: 0.4 } };
        assert!(polygon_period(&sq, c, 10, 1e-9).is_err());
    }
}
