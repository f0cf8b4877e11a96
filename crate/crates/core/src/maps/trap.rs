use serde::{Deserialize, Serialize};

use crate::analysis::orbit::{OrbitRecord, OrbitStep, State, Termination};
use crate::maps::projective::Ray;
use crate::vec2::Vec2;
use crate::{Error, Result};

/// Two confocal coaxial parabolas with common focus at the origin and vertical axis,
/// `y = x²/(4a) - a` (inner mirror) and `y = x²/(4b) - b` (outer mirror, `b > a`).
///
/// Light enters through the aperture: the part of the inner mirror with
/// `aperture[0] < x < aperture[1]` is removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolaTrap {
    pub inner_focal: f64,
    pub outer_focal: f64,
    pub aperture: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mirror {
    Inner,
    Outer,
}

impl ParabolaTrap {
    pub fn new(inner_focal: f64, outer_focal: f64, aperture: [f64; 2]) -> Result<Self> {
        if !(inner_focal > 0.0 && outer_focal > inner_focal && outer_focal.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "focal parameters must satisfy 0 < inner < outer, got {inner_focal} and {outer_focal}"
            )));
        }
        if !(aperture[0] < aperture[1]) || !aperture[0].is_finite() || !aperture[1].is_finite() {
            return Err(Error::InvalidArgument(format!("aperture {aperture:?} is empty")));
        }
        if aperture[0] <= 0.0 && aperture[1] >= 0.0 {
            return Err(Error::InvalidArgument("aperture must not contain the axis".into()));
        }
        Ok(ParabolaTrap { inner_focal, outer_focal, aperture })
    }

    fn focal(&self, m: Mirror) -> f64 {
        match m {
            Mirror::Inner => self.inner_focal,
            Mirror::Outer => self.outer_focal,
        }
    }

    fn in_aperture(&self, x: f64) -> bool {
        x > self.aperture[0] && x < self.aperture[1]
    }

    /// Height of the entry ray's starting point: above the inner mirror over the aperture.
    pub fn entry_height(&self) -> f64 {
        let xm = self.aperture[0].abs().max(self.aperture[1].abs());
        xm * xm / (4.0 * self.inner_focal) + 1.0
    }

    /// Smallest `λ > min_lambda` with `o + λ d` on mirror `m`.
    fn hit(&self, m: Mirror, o: Vec2, d: Vec2, min_lambda: f64) -> Option<f64> {
        let f = self.focal(m);
        // (ox + λ dx)² / (4f) - f - (oy + λ dy) = 0
        let qa = d.x * d.x / (4.0 * f);
        let qb = o.x * d.x / (2.0 * f) - d.y;
        let qc = o.x * o.x / (4.0 * f) - f - o.y;
        let mut roots = [f64::NAN; 2];
        if qa == 0.0 {
            if qb != 0.0 {
                roots[0] = -qc / qb;
            }
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                return None;
            }
            let q = -0.5 * (qb + qb.signum() * disc.sqrt());
            roots[0] = q / qa;
            roots[1] = if q != 0.0 { qc / q } else { f64::NAN };
        }
        roots.into_iter().filter(|r| r.is_finite() && *r > min_lambda).min_by(f64::total_cmp)
    }
}

/// Trace a ray between the mirrors for at most `n_max` reflections.
///
/// The ray must be parallel to the axis and off it. Crossing the axis, escaping through the
/// aperture or to infinity, and missing the aperture on entry all end the trace as `diverged`;
/// the reason is in the record's note.
pub fn trap_trace(trap: &ParabolaTrap, ray: Ray, n_max: usize) -> Result<OrbitRecord> {
    let d0 = ray.unit();
    if d0.x.abs() > 1e-12 {
        return Err(Error::InvalidArgument("entry ray must be parallel to the axis".into()));
    }
    if ray.origin.x == 0.0 {
        return Err(Error::InvalidArgument("entry ray lies on the axis".into()));
    }
    let side = ray.origin.x.signum();
    let mut record = OrbitRecord::new("trap", State::Ray(ray));
    record.set_parameter("inner_focal", trap.inner_focal);
    record.set_parameter("outer_focal", trap.outer_focal);
    record.set_parameter("aperture_lo", trap.aperture[0]);
    record.set_parameter("aperture_hi", trap.aperture[1]);
    let mut o = ray.origin;
    let mut d = Vec2::new(0.0, d0.y.signum());
    let mut entered = false;
    let mut index = 0;
    while index < n_max {
        // path lengths between the mirrors never fall below `b - a`
        let min_lambda = 1e-9 * trap.inner_focal;
        let inner = trap.hit(Mirror::Inner, o, d, min_lambda);
        let outer = trap.hit(Mirror::Outer, o, d, min_lambda);
        let mut candidates: Vec<(f64, Mirror)> = vec![];
        if let Some(l) = inner {
            candidates.push((l, Mirror::Inner));
        }
        if let Some(l) = outer {
            candidates.push((l, Mirror::Outer));
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        let Some(&(lambda, mirror)) = candidates.first() else {
            record.finish(Termination::Diverged, Some("escaped to infinity"));
            return Ok(record);
        };
        let p = o + d * lambda;
        if mirror == Mirror::Inner && trap.in_aperture(p.x) {
            if entered {
                record.finish(Termination::Diverged, Some("escaped through the aperture"));
                return Ok(record);
            }
            // entering: pass through the opening and continue
            entered = true;
            o = p;
            continue;
        }
        if !entered {
            record.finish(Termination::Diverged, Some("ray missed the aperture"));
            return Ok(record);
        }
        index += 1;
        let f = trap.focal(mirror);
        let n = Vec2::new(p.x / (2.0 * f), -1.0).normalized();
        d = (d - n * (2.0 * d.dot(n))).normalized();
        o = p;
        let crossed = p.x * side <= 0.0;
        let mut diagnostics = std::collections::BTreeMap::new();
        diagnostics.insert("mirror".to_string(), if mirror == Mirror::Inner { 0.0 } else { 1.0 });
        record.push(OrbitStep {
            index,
            state: State::Ray(Ray::new(p, d.angle())),
            winding: 0,
            diagnostics,
        });
        if crossed {
            record.finish(Termination::Diverged, Some("crossed the axis"));
            return Ok(record);
        }
    }
    record.finish(Termination::Completed, None);
    Ok(record)
}
