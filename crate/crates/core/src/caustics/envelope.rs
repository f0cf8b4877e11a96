use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::vec2::Vec2;
use crate::{Error, Result};

pub const MIN_FAMILY_SIZE: usize = 64;
/// Share of vanishing denominators above which a family is rejected.
pub const MAX_DEGENERATE_SHARE: f64 = 0.1;
/// Angular speed below which the envelope denominator counts as vanishing.
pub const DENOMINATOR_TOL: f64 = 1e-9;
/// Relative speed threshold for the cusp hysteresis.
pub const CUSP_THRESHOLD: f64 = 1e-8;
/// A cusp counts when confirmed on both sides within this many samples.
pub const CUSP_WINDOW: usize = 5;

/// Lines `p_i + λ u_i` sampled on the uniform grid `t_i = 2π i / m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFamily {
    points: Vec<Vec2>,
    directions: Vec<Vec2>,
}

impl LineFamily {
    pub fn new(points: Vec<Vec2>, directions: Vec<Vec2>) -> Result<Self> {
        if points.len() != directions.len() {
            return Err(Error::InvalidArgument("points and directions differ in length".into()));
        }
        if points.len() < MIN_FAMILY_SIZE {
            return Err(Error::InsufficientData { needed: MIN_FAMILY_SIZE, got: points.len() });
        }
        if directions.iter().any(|d| !(d.norm() > 0.0)) || points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidArgument("family has zero directions or non-finite points".into()));
        }
        Ok(LineFamily { points, directions: directions.into_iter().map(Vec2::normalized).collect() })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn directions(&self) -> &[Vec2] {
        &self.directions
    }

    pub fn param(&self, i: usize) -> f64 {
        TAU * i as f64 / self.len() as f64
    }
}

/// Envelope samples with cusp markers; undefined samples are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCurve {
    pub params: Vec<f64>,
    pub points: Vec<Option<Vec2>>,
    /// Signed speed `σ` with `E' = σ u`, where available.
    pub speed: Vec<Option<f64>>,
    pub cusp: Vec<bool>,
    /// All defined points coincide: the family is a pencil.
    pub collapsed: bool,
    pub source: String,
}

impl EnvelopeCurve {
    pub fn defined_points(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.points.iter().flatten().copied()
    }

    pub fn diameter(&self) -> f64 {
        let pts: Vec<Vec2> = self.defined_points().collect();
        let mut d: f64 = 0.0;
        // O(m²) is fine at the family sizes used here
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                d = d.max(a.distance(*b));
            }
        }
        d
    }

    pub fn defined_share(&self) -> f64 {
        self.points.iter().filter(|p| p.is_some()).count() as f64 / self.points.len().max(1) as f64
    }

    /// RFC 4180 CSV with header `t,x,y,cusp`; undefined samples have empty coordinates.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y,cusp\r\n");
        for (i, t) in self.params.iter().enumerate() {
            match self.points[i] {
                Some(p) => out.push_str(&format!("{t},{},{},{}\r\n", p.x, p.y, self.cusp[i] as u8)),
                None => out.push_str(&format!("{t},,,{}\r\n", self.cusp[i] as u8)),
            }
        }
        out
    }
}

/// Derivative of a `2π`-periodic function sampled on a uniform grid, by FFT.
pub fn spectral_derivative(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (j, c) in buf.iter_mut().enumerate() {
        let k = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
        if m % 2 == 0 && j == m / 2 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, k);
        }
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / m as f64).collect()
}

/// Envelope `E = p + τ u` with `τ = -det(u, p') / det(u, u')`.
pub fn envelope(family: &LineFamily) -> Result<EnvelopeCurve> {
    let m = family.len();
    let (p, u) = (family.points(), family.directions());
    let px: Vec<f64> = p.iter().map(|v| v.x).collect();
    let py: Vec<f64> = p.iter().map(|v| v.y).collect();
    let ux: Vec<f64> = u.iter().map(|v| v.x).collect();
    let uy: Vec<f64> = u.iter().map(|v| v.y).collect();
    let (dpx, dpy) = (spectral_derivative(&px), spectral_derivative(&py));
    let (dux, duy) = (spectral_derivative(&ux), spectral_derivative(&uy));
    let dp: Vec<Vec2> = (0..m).map(|i| Vec2::new(dpx[i], dpy[i])).collect();
    let du: Vec<Vec2> = (0..m).map(|i| Vec2::new(dux[i], duy[i])).collect();
    let num: Vec<f64> = (0..m).map(|i| -u[i].cross(dp[i])).collect();
    let den: Vec<f64> = (0..m).map(|i| u[i].cross(du[i])).collect();
    let vanishing = den.iter().filter(|d| d.abs() < DENOMINATOR_TOL).count();
    if vanishing as f64 > MAX_DEGENERATE_SHARE * m as f64 {
        return Err(Error::DegenerateFamily { vanishing, total: m });
    }
    let dnum = spectral_derivative(&num);
    let dden = spectral_derivative(&den);
    let mut points = Vec::with_capacity(m);
    let mut speed = Vec::with_capacity(m);
    for i in 0..m {
        if den[i].abs() < DENOMINATOR_TOL {
            points.push(None);
            speed.push(None);
            continue;
        }
        let tau = num[i] / den[i];
        let dtau = (dnum[i] * den[i] - num[i] * dden[i]) / (den[i] * den[i]);
        points.push(Some(p[i] + u[i] * tau));
        speed.push(Some(dp[i].dot(u[i]) + dtau));
    }
    let mut env = EnvelopeCurve {
        params: (0..m).map(|i| family.param(i)).collect(),
        points,
        speed,
        cusp: vec![false; m],
        collapsed: false,
        source: "line_family".into(),
    };
    let scale = p.iter().map(|q| q.norm()).fold(0.0, f64::max).max(1e-300);
    env.collapsed = env.diameter() <= 1e-9 * scale;
    if !env.collapsed {
        mark_cusps(&mut env)?;
    }
    Ok(env)
}

/// Flag sign changes of the envelope speed that are confirmed on both sides.
fn mark_cusps(env: &mut EnvelopeCurve) -> Result<()> {
    let m = env.points.len();
    let thr = CUSP_THRESHOLD * env.diameter() / TAU;
    let confirmed: Vec<Option<f64>> = env
        .speed
        .iter()
        .map(|s| s.filter(|v| v.abs() > thr).map(f64::signum))
        .collect();
    let Some(first) = confirmed.iter().position(Option::is_some) else {
        return Ok(());
    };
    let mut last = first;
    for step in 1..=m {
        let i = (first + step) % m;
        let Some(sign) = confirmed[i] else { continue };
        let prev = confirmed[last].expect("confirmed");
        if sign != prev {
            let gap = (i + m - last) % m;
            let gap = if gap == 0 { m } else { gap };
            let undefined = (1..gap).any(|j| env.points[(last + j) % m].is_none());
            if undefined {
                return Err(Error::UnresolvedCusp { index: i });
            }
            // the cusp sits at the smallest |σ| between the two confirmations
            let at = (0..=gap)
                .map(|j| (last + j) % m)
                .min_by(|&a, &b| {
                    let sa = env.speed[a].map_or(f64::INFINITY, f64::abs);
                    let sb = env.speed[b].map_or(f64::INFINITY, f64::abs);
                    sa.total_cmp(&sb)
                })
                .expect("non-empty");
            if gap <= 2 * CUSP_WINDOW || !env.cusp[at] {
                env.cusp[at] = true;
            }
        }
        last = i;
    }
    Ok(())
}

/// Number of cusps of an envelope (sign changes of its speed).
pub fn cusp_count(env: &EnvelopeCurve) -> Result<usize> {
    if env.defined_share() < 0.9 {
        return Err(Error::DegenerateEnvelope);
    }
    if env.collapsed {
        return Err(Error::DegenerateEnvelope);
    }
    Ok(env.cusp.iter().filter(|&&c| c).count())
}

/// Tangent lines of an oval sampled at `m` equally spaced parameters.
pub fn tangent_family(oval: &crate::geometry::Oval, m: usize) -> Result<LineFamily> {
    let ts: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64).collect();
    LineFamily::new(ts.iter().map(|&t| oval.position(t)).collect(), ts.iter().map(|&t| oval.unit_tangent(t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Oval;

    #[test]
    fn spectral_derivative_of_sine() {
        let m = 64;
        let v: Vec<f64> = (0..m).map(|i| (3.0 * TAU * i as f64 / m as f64).sin()).collect();
        let d = spectral_derivative(&v);
        for (i, x) in d.iter().enumerate() {
            assert!((x - 3.0 * (3.0 * TAU * i as f64 / m as f64).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_is_envelope_of_its_tangents() {
        let c = Oval::circle(1.0).unwrap();
        let env = envelope(&tangent_family(&c, 128).unwrap()).unwrap();
        for p in env.defined_points() {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(cusp_count(&env).unwrap(), 0);
    }

    #[test]
    fn parallel_family_is_degenerate() {
        let pts: Vec<Vec2> = (0..64).map(|i| Vec2::new(0.0, i as f64)).collect();
        let dirs = vec![Vec2::new(1.0, 0.0); 64];
        let fam = LineFamily::new(pts, dirs).unwrap();
        assert!(matches!(envelope(&fam), Err(Error::DegenerateFamily { .. })));
    }

    #[test]
    fn pencil_collapses() {
        let dirs: Vec<Vec2> = (0..64).map(|i| Vec2::from_angle(TAU * i as f64 / 64.0)).collect();
        let pts: Vec<Vec2> = dirs.iter().map(|d| Vec2::new(0.5, 0.5) + *d * 2.0).collect();
        let env = envelope(&LineFamily::new(pts, dirs).unwrap()).unwrap();
        assert!(env.collapsed);
        assert!(cusp_count(&env).is_err());
    }
}
