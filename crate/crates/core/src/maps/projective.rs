use serde::{Deserialize, Serialize};

use crate::geometry::{Oval, PolygonTable};
use crate::vec2::{normalize_angle, Vec2};
use crate::{Error, Result, GRAZING_SINE};

/// Minimum sine between tangent and transverse line.
pub const TRANSVERSALITY: f64 = 1e-9;

/// Ray with a boundary or interior origin and a direction angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Vec2,
    pub direction: f64,
}

impl Ray {
    pub fn new(origin: Vec2, direction: f64) -> Self {
        Ray { origin, direction: normalize_angle(direction) }
    }

    pub fn unit(&self) -> Vec2 {
        Vec2::from_angle(self.direction)
    }
}

/// Assignment of a transverse line to every boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransverseField {
    /// The normal line: ordinary billiards.
    Orthogonal,
    /// Triangles: the line through the vertex opposite the edge.
    TowardOppositeVertex,
    /// Quadrilaterals: the line through the intersection of the diagonals.
    TowardDiagonalIntersection,
    /// The line through a fixed point.
    TowardPoint { point: [f64; 2] },
    /// A fixed direction angle per polygon edge.
    EdgeAngles { angles: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectiveBoundary {
    Polygon(PolygonTable),
    Oval(Oval),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveTable {
    boundary: ProjectiveBoundary,
    field: TransverseField,
    /// Resolved pencil centre for the point-based fields.
    center: Option<Vec2>,
}

/// Where a projective ray landed and how it leaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectiveStep {
    pub ray: Ray,
    /// Edge index for polygons, curve parameter for ovals.
    pub edge: Option<usize>,
    pub param: f64,
}

impl ProjectiveTable {
    pub fn new(boundary: ProjectiveBoundary, field: TransverseField) -> Result<Self> {
        let center = match (&boundary, &field) {
            (ProjectiveBoundary::Polygon(p), TransverseField::TowardOppositeVertex) => {
                if p.len() != 3 {
                    return Err(Error::InvalidArgument("toward_opposite_vertex needs a triangle".into()));
                }
                None
            }
            (ProjectiveBoundary::Polygon(p), TransverseField::TowardDiagonalIntersection) => {
                if p.len() != 4 || !p.is_convex() {
                    return Err(Error::InvalidArgument(
                        "toward_diagonal_intersection needs a convex quadrilateral".into(),
                    ));
                }
                let v = p.vertices();
                let d1 = crate::geometry::OrientedLine::through(v[0], v[2] - v[0]);
                let d2 = crate::geometry::OrientedLine::through(v[1], v[3] - v[1]);
                Some(d1.intersection(&d2).ok_or(Error::NotTransverse)?)
            }
            (ProjectiveBoundary::Polygon(p), TransverseField::EdgeAngles { angles }) => {
                if angles.len() != p.len() {
                    return Err(Error::InvalidArgument(format!(
                        "edge_angles needs {} angles, got {}",
                        p.len(),
                        angles.len()
                    )));
                }
                for (i, &a) in angles.iter().enumerate() {
                    if p.edge_vector(i).normalized().cross(Vec2::from_angle(a)).abs() < TRANSVERSALITY {
                        return Err(Error::NotTransverse);
                    }
                }
                None
            }
            (ProjectiveBoundary::Oval(_), TransverseField::TowardOppositeVertex)
            | (ProjectiveBoundary::Oval(_), TransverseField::TowardDiagonalIntersection)
            | (ProjectiveBoundary::Oval(_), TransverseField::EdgeAngles { .. }) => {
                return Err(Error::InvalidArgument("this transverse field needs a polygon table".into()));
            }
            (_, TransverseField::TowardPoint { point }) => Some(Vec2::from(*point)),
            (_, TransverseField::Orthogonal) => None,
        };
        Ok(ProjectiveTable { boundary, field, center })
    }

    pub fn boundary(&self) -> &ProjectiveBoundary {
        &self.boundary
    }

    pub fn field(&self) -> &TransverseField {
        &self.field
    }

    pub fn diameter(&self) -> f64 {
        match &self.boundary {
            ProjectiveBoundary::Polygon(p) => p.diameter(),
            ProjectiveBoundary::Oval(o) => o.diameter(),
        }
    }

    /// Unit tangent and transverse direction at a boundary point.
    fn frame(&self, point: Vec2, edge: Option<usize>, param: f64) -> Result<(Vec2, Vec2)> {
        let tangent = match (&self.boundary, edge) {
            (ProjectiveBoundary::Polygon(p), Some(e)) => p.edge_vector(e).normalized(),
            (ProjectiveBoundary::Oval(o), _) => o.unit_tangent(param),
            _ => unreachable!("polygon frame without an edge"),
        };
        let transverse = match &self.field {
            TransverseField::Orthogonal => tangent.perp(),
            TransverseField::TowardOppositeVertex => {
                let ProjectiveBoundary::Polygon(p) = &self.boundary else { unreachable!() };
                let e = edge.expect("polygon edge");
                (p.vertices()[(e + 2) % 3] - point).normalized()
            }
            TransverseField::TowardDiagonalIntersection | TransverseField::TowardPoint { .. } => {
                let c = self.center.expect("pencil centre");
                let d = c - point;
                if d.norm() < 1e-15 * self.diameter() {
                    return Err(Error::NotTransverse);
                }
                d.normalized()
            }
            TransverseField::EdgeAngles { angles } => Vec2::from_angle(angles[edge.expect("polygon edge")]),
        };
        if tangent.cross(transverse).abs() < TRANSVERSALITY {
            return Err(Error::NotTransverse);
        }
        Ok((tangent, transverse))
    }
}

/// Reflect `incoming_dir` in the pencil at a boundary point: writing the incoming unit
/// vector as `a t + b n`, the outgoing one is `a t - b n` normalised.
pub fn projective_reflect(tangent_dir: f64, transverse_dir: f64, incoming_dir: f64) -> Result<f64> {
    let t = Vec2::from_angle(tangent_dir);
    let n = Vec2::from_angle(transverse_dir);
    Ok(reflect_vec(t, n, Vec2::from_angle(incoming_dir))?.angle())
}

fn reflect_vec(t: Vec2, n: Vec2, d: Vec2) -> Result<Vec2> {
    let det = t.cross(n);
    if det.abs() < TRANSVERSALITY {
        return Err(Error::NotTransverse);
    }
    let sine = t.cross(d);
    if sine.abs() < GRAZING_SINE {
        return Err(Error::TangentialRay { sine });
    }
    // Cramer's rule for d = a t + b n
    let a = d.cross(n) / det;
    let b = t.cross(d) / det;
    Ok((t * a - n * b).normalized())
}

/// Follow the ray to the next boundary point and reflect it there.
pub fn projective_map(table: &ProjectiveTable, ray: Ray) -> Result<ProjectiveStep> {
    let d = ray.unit();
    let (point, edge, param) = match &table.boundary {
        ProjectiveBoundary::Polygon(p) => {
            let hit = p.ray_hit(ray.origin, None, d)?;
            (hit.point, Some(hit.edge), hit.u)
        }
        ProjectiveBoundary::Oval(o) => {
            let t = o.ray_exit(ray.origin, d)?;
            (o.position(t), None, t)
        }
    };
    let (t, n) = table.frame(point, edge, param)?;
    let out = reflect_vec(t, n, d)?;
    Ok(ProjectiveStep { ray: Ray::new(point, out.angle()), edge, param })
}
