use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::maps::projective::{projective_map, ProjectiveBoundary, ProjectiveTable, Ray};
use crate::vec2::wrap_to_pi;
use crate::{Error, Result};

/// Closure tolerance on position (relative to the table diameter) and direction.
pub const CLOSURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectivityReport {
    /// Share of admissible chords that close after `k` reflections.
    pub fraction_periodic: f64,
    /// Largest closure error among the closing chords.
    pub max_closure_error: f64,
    pub admissible: usize,
    pub attempted: usize,
}

/// Random chord: a boundary point and an inward direction at incidence angle in `[0.05, π - 0.05]`.
fn random_chord<R: Rng + ?Sized>(table: &ProjectiveTable, rng: &mut R) -> Ray {
    let (p, tangent) = match table.boundary() {
        ProjectiveBoundary::Polygon(poly) => {
            let e = rng.random_range(0..poly.len());
            let u = rng.random_range(0.02..0.98);
            (poly.point_on_edge(e, u), poly.edge_angle(e))
        }
        ProjectiveBoundary::Oval(o) => {
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            (o.position(t), o.tangent_angle(t))
        }
    };
    let alpha = rng.random_range(0.05..std::f64::consts::PI - 0.05);
    Ray::new(p, tangent + alpha)
}

/// Sample chords until `n_samples` admissible ones are found and count those that return to
/// their initial position and direction after `k` reflections.
///
/// A chord is admissible when none of its first `k` hits is at a vertex and, on polygons,
/// consecutive hit edges advance by the same step `+1` or `-1` around the boundary.
pub fn reflectivity_test<R: Rng + ?Sized>(table: &ProjectiveTable, k: usize, n_samples: usize, rng: &mut R) -> Result<ReflectivityReport> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    let diameter = table.diameter();
    let mut admissible = 0;
    let mut closing = 0;
    let mut max_err: f64 = 0.0;
    let mut attempted = 0;
    let max_attempts = 1000 * n_samples.max(1);
    while admissible < n_samples && attempted < max_attempts {
        attempted += 1;
        let start = random_chord(table, rng);
        let mut ray = start;
        let mut edges = Vec::with_capacity(k);
        let mut ok = true;
        for _ in 0..k {
            match projective_map(table, ray) {
                Ok(step) => {
                    ray = step.ray;
                    edges.extend(step.edge);
                }
                Err(Error::VertexHit { .. }) | Err(Error::TangentialRay { .. }) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !ok {
            continue;
        }
        if let ProjectiveBoundary::Polygon(poly) = table.boundary() {
            let m = poly.len() as i64;
            let steps: Vec<i64> = edges.windows(2).map(|w| (w[1] as i64 - w[0] as i64).rem_euclid(m)).collect();
            let uniform = steps.windows(2).all(|w| w[0] == w[1]) && steps.first().is_none_or(|&s| s == 1 || s == m - 1);
            if !uniform {
                continue;
            }
        }
        admissible += 1;
        let err = (ray.origin - start.origin).norm() / diameter;
        let err = err.max(wrap_to_pi(ray.direction - start.direction).abs());
        if err < CLOSURE_TOL {
            closing += 1;
            max_err = max_err.max(err);
        }
    }
    if admissible == 0 {
        return Err(Error::InsufficientData { needed: n_samples, got: 0 });
    }
    Ok(ReflectivityReport {
        fraction_periodic: closing as f64 / admissible as f64,
        max_closure_error: max_err,
        admissible,
        attempted,
    })
}
