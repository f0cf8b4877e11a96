use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use super::envelope::{envelope, EnvelopeCurve, LineFamily};
use crate::analysis::invariants::{invariant_curve_diagnostic, Verdict};
use crate::analysis::orbit::OrbitRecord;
use crate::geometry::Oval;
use crate::vec2::Vec2;
use crate::{Error, Result};

pub const DEFAULT_REFLECTION_RAYS: usize = 2048;
pub const DEFAULT_CURVE_GRID: usize = 512;
const FIT_POINTS: usize = 11;
const FIT_DEGREE: usize = 4;

fn reflect(d: Vec2, normal: Vec2) -> Vec2 {
    d - normal * (2.0 * d.dot(normal))
}

/// Lines of the rays from an interior `source` after their `n`-th reflection,
/// parametrised by the initial direction.
pub fn reflected_family(oval: &Oval, source: Vec2, n: usize, m: usize) -> Result<LineFamily> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one reflection is needed".into()));
    }
    if !oval.contains(source) {
        return Err(Error::InvalidArgument("source must lie inside the table".into()));
    }
    let mut points = Vec::with_capacity(m);
    let mut dirs = Vec::with_capacity(m);
    for i in 0..m {
        let mut d = Vec2::from_angle(TAU * i as f64 / m as f64);
        let mut t = oval.ray_exit(source, d)?;
        for k in 0..n {
            if k > 0 {
                t = oval.second_intersection(t, d.angle())?;
            }
            d = reflect(d, oval.outward_normal(t));
        }
        points.push(oval.position(t));
        dirs.push(d);
    }
    LineFamily::new(points, dirs)
}

/// Envelope of the rays from `source` after `n` reflections.
pub fn caustic_by_reflection(oval: &Oval, source: Vec2, n: usize, m: usize) -> Result<EnvelopeCurve> {
    let mut env = envelope(&reflected_family(oval, source, n, m)?)?;
    env.source = format!("reflection:{n}");
    Ok(env)
}

/// Caustic of an invariant curve traced by a Birkhoff orbit.
///
/// `α(s)` and `α'(s)` come from local quartic fits through the orbit points nearest each
/// grid node; the chord from `γ(s)` touches the caustic at distance `sin α / (κ + α')`.
pub fn caustic_from_invariant_curve(oval: &Oval, orbit: &OrbitRecord, grid: usize) -> Result<EnvelopeCurve> {
    let diag = invariant_curve_diagnostic(orbit)?;
    if diag.verdict != Verdict::InvariantCurveLike {
        return Err(Error::NotInvariant { thickness: diag.graph_thickness });
    }
    let length = oval.total_length();
    let mut pts: Vec<(f64, f64)> = orbit
        .states()
        .filter_map(|s| s.as_phase())
        .map(|p| (p.s.rem_euclid(length), p.alpha))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 * length);
    if pts.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: pts.len() });
    }
    // periodic orbits leave only a few distinct points
    let k = FIT_POINTS.min(pts.len());
    let degree = FIT_DEGREE.min(k - 1);
    let np = pts.len();
    let mut points = Vec::with_capacity(grid);
    let mut params = Vec::with_capacity(grid);
    for g in 0..grid {
        let s0 = length * g as f64 / grid as f64;
        let idx = pts.partition_point(|p| p.0 < s0) as i64;
        let start = idx - (k as i64) / 2;
        let mut xs = Vec::with_capacity(k);
        let mut ys = Vec::with_capacity(k);
        for j in start..start + k as i64 {
            let wrap = j.div_euclid(np as i64) as f64;
            let (s, a) = pts[j.rem_euclid(np as i64) as usize];
            xs.push(s + wrap * length - s0);
            ys.push(a);
        }
        let w = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let design = DMatrix::from_fn(k, degree + 1, |r, c| (xs[r] / w).powi(c as i32));
        let c = design
            .svd(true, true)
            .solve(&DVector::from_vec(ys), 1e-14)
            .map_err(|_| Error::NoConvergence { operation: "invariant curve fit" })?;
        let (alpha, dalpha) = (c[0], c[1] / w);
        let t = oval.param_of_arclength(s0);
        let kappa = oval.curvature(t);
        let den = kappa + dalpha;
        let u = Vec2::from_angle(oval.tangent_angle(t) + alpha);
        params.push(s0);
        points.push((den.abs() > 1e-12).then(|| oval.position(t) + u * (alpha.sin() / den)));
    }
    Ok(EnvelopeCurve {
        params,
        speed: vec![None; grid],
        cusp: vec![false; grid],
        collapsed: false,
        points,
        source: "invariant_curve".into(),
    })
}
