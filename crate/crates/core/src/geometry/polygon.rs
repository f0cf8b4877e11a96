use serde::{Deserialize, Serialize};

use crate::vec2::{Affine2, Vec2};
use crate::{Error, Result};

/// Relative radius around vertices inside which a boundary hit counts as a vertex hit.
pub const VERTEX_RADIUS: f64 = 1e-12;

/// Simple counterclockwise polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct PolygonTable {
    vertices: Vec<Vec2>,
    diameter: f64,
    convex: bool,
}

/// Point where a line meets the polygon boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryHit {
    pub edge: usize,
    /// Position along the edge in `[0, 1]`.
    pub u: f64,
    /// Signed distance along the query direction.
    pub lambda: f64,
    pub point: Vec2,
}

impl PolygonTable {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidCurve(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidCurve("polygon vertices must be finite".into()));
        }
        let area = signed_area(&vertices);
        if !(area > 0.0) {
            return Err(Error::InvalidCurve(format!(
                "polygon must be counterclockwise with positive area (signed area {area})"
            )));
        }
        let mut diameter: f64 = 0.0;
        for a in &vertices {
            for b in &vertices {
                diameter = diameter.max(a.distance(*b));
            }
        }
        for i in 0..n {
            if vertices[i].distance(vertices[(i + 1) % n]) <= 1e-12 * diameter {
                return Err(Error::InvalidCurve(format!("edge {i} has zero length")));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(Error::InvalidCurve(format!("edges {i} and {j} intersect")));
                }
            }
        }
        let convex = (0..n).all(|i| {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            (b - a).cross(c - b) > 0.0
        });
        Ok(PolygonTable { vertices, diameter, convex })
    }

    pub fn from_points(points: &[[f64; 2]]) -> Result<Self> {
        PolygonTable::new(points.iter().map(|&p| Vec2::from(p)).collect())
    }

    pub fn transformed(&self, map: &Affine2) -> Result<Self> {
        PolygonTable::new(self.vertices.iter().map(|&v| map.apply(v)).collect())
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// True when every interior angle is below π.
    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len()).map(|i| self.edge_vector(i).norm()).sum()
    }

    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        let n = self.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edge_vector(&self, i: usize) -> Vec2 {
        let (a, b) = self.edge(i);
        b - a
    }

    /// Direction angle of edge `i`, oriented counterclockwise.
    pub fn edge_angle(&self, i: usize) -> f64 {
        self.edge_vector(i).angle()
    }

    pub fn point_on_edge(&self, edge: usize, u: f64) -> Vec2 {
        let (a, b) = self.edge(edge);
        a + (b - a) * u
    }

    /// Index of the vertex within the vertex radius of `p`, if any.
    pub fn near_vertex(&self, p: Vec2) -> Option<usize> {
        let r = VERTEX_RADIUS * self.diameter;
        self.vertices.iter().position(|v| v.distance(p) <= r)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        // winding test; boundary points count as outside
        let n = self.len();
        let mut inside = false;
        for i in 0..n {
            let (a, b) = self.edge(i);
            if (b - a).cross(p - a) == 0.0 && (p - a).dot(p - b) <= 0.0 {
                return false;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// All transversal crossings of the line `origin + λ dir` with the edges.
    pub fn line_hits(&self, origin: Vec2, dir: Vec2) -> Vec<BoundaryHit> {
        let mut hits = Vec::new();
        for i in 0..self.len() {
            let (a, b) = self.edge(i);
            let e = b - a;
            let det = dir.cross(e);
            if det.abs() <= 1e-15 * dir.norm() * e.norm() {
                continue;
            }
            let w = a - origin;
            let lambda = w.cross(e) / det;
            let u = w.cross(dir) / det;
            if (-1e-13..=1.0 + 1e-13).contains(&u) {
                let u = u.clamp(0.0, 1.0);
                hits.push(BoundaryHit { edge: i, u, lambda, point: a + e * u });
            }
        }
        hits
    }

    /// Next boundary point hit by the ray from `origin` on edge `from_edge` along `dir`.
    ///
    /// Fails with [`Error::VertexHit`] when the hit falls within the vertex radius.
    pub fn ray_hit(&self, origin: Vec2, from_edge: Option<usize>, dir: Vec2) -> Result<BoundaryHit> {
        let tiny = 1e-12 * self.diameter;
        let hit = self
            .line_hits(origin, dir)
            .into_iter()
            .filter(|h| Some(h.edge) != from_edge && h.lambda > tiny)
            .min_by(|a, b| a.lambda.total_cmp(&b.lambda))
            .ok_or_else(|| Error::InvalidArgument("ray does not meet the boundary".into()))?;
        if let Some(vertex) = self.near_vertex(hit.point) {
            return Err(Error::VertexHit { vertex });
        }
        Ok(hit)
    }
}

impl TryFrom<Vec<[f64; 2]>> for PolygonTable {
    type Error = Error;

    fn try_from(points: Vec<[f64; 2]>) -> Result<Self> {
        PolygonTable::from_points(&points)
    }
}

impl From<PolygonTable> for Vec<[f64; 2]> {
    fn from(p: PolygonTable) -> Self {
        p.vertices.iter().map(|v| v.to_array()).collect()
    }
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    o1 * o2 <= 0.0 && o3 * o4 <= 0.0 && !(o1 == 0.0 && o2 == 0.0 && {
        // collinear: overlap test on the projection
        let t = b - a;
        let (p0, p1) = (0.0, t.norm_sq());
        let (q0, q1) = ((c - a).dot(t), (d - a).dot(t));
        q0.max(q1) < p0 || q0.min(q1) > p1
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PolygonTable {
        PolygonTable::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn validates_orientation_and_simplicity() {
        assert!(PolygonTable::from_points(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        let bow = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(PolygonTable::from_points(&bow).is_err());
        assert!(PolygonTable::from_points(&[[0.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(square().is_convex());
        let dart = [[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [1.0, 2.0]];
        assert!(!PolygonTable::from_points(&dart).unwrap().is_convex());
    }

    #[test]
    fn ray_hits_and_vertex_detection() {
        let sq = square();
        let h = sq.ray_hit(Vec2::new(0.3, 0.0), Some(0), Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!(h.edge, 2);
        assert!(h.point.distance(Vec2::new(0.3, 1.0)) < 1e-15);
        let v = sq.ray_hit(Vec2::new(0.5, 0.0), Some(0), Vec2::new(1.0, 2.0));
        assert!(matches!(v, Err(Error::VertexHit { vertex: 2 })));
    }

    #[test]
    fn containment() {
        let sq = square();
        assert!(sq.contains(Vec2::new(0.5, 0.5)));
        assert!(!sq.contains(Vec2::new(1.5, 0.5)));
        assert!(!sq.contains(Vec2::new(1.0, 0.5)));
    }
}
