use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::envelope::EnvelopeCurve;
use crate::geometry::roots::golden_max;
use crate::geometry::{OrientedLine, Oval};
use crate::vec2::Vec2;
use crate::{Error, Result};

/// Trigonometric interpolant of a closed curve sampled on a uniform grid.
struct TrigCurve {
    coeffs: Vec<Complex64>,
    m: usize,
}

impl TrigCurve {
    fn new(points: &[Vec2]) -> Self {
        let m = points.len();
        let mut buf: Vec<Complex64> = points.iter().map(|p| Complex64::new(p.x, p.y)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        for c in &mut buf {
            *c /= m as f64;
        }
        TrigCurve { coeffs: buf, m }
    }

    /// Point at fractional sample index `x`.
    fn eval(&self, x: f64) -> Vec2 {
        let m = self.m;
        let theta = TAU * x / m as f64;
        let mut z = Complex64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            let k = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
            // split the Nyquist term so the interpolant stays real-symmetric
            let w = if m % 2 == 0 && j == m / 2 { (theta * k).cos() * c } else { Complex64::from_polar(1.0, theta * k) * c };
            z += w;
        }
        Vec2::new(z.re, z.im)
    }
}

fn mirror(axis: &OrientedLine, p: Vec2) -> Vec2 {
    p - axis.direction().perp() * (2.0 * axis.signed_distance(p))
}

/// Largest distance from the mirror image of the envelope to the envelope itself, relative to
/// its diameter.
pub fn symmetry_defect(env: &EnvelopeCurve, axis: &OrientedLine) -> Result<f64> {
    let points: Vec<Vec2> = env.points.iter().copied().collect::<Option<_>>().ok_or(Error::DegenerateEnvelope)?;
    if env.collapsed || points.len() < 8 {
        return Err(Error::DegenerateEnvelope);
    }
    let diam = env.diameter();
    let curve = TrigCurve::new(&points);
    let m = points.len();
    let mut worst: f64 = 0.0;
    for p in &points {
        let q = mirror(axis, *p);
        let j = (0..m).min_by(|&a, &b| points[a].distance(q).total_cmp(&points[b].distance(q))).expect("non-empty");
        let (_, neg) = golden_max(|x| -curve.eval(x).distance(q), j as f64 - 1.0, j as f64 + 1.0, 1e-12);
        worst = worst.max(-neg);
    }
    Ok(worst / diam)
}

/// Length of a closed string wrapped around `inner` and pulled tight at `p`.
pub fn string_length(outer_point: Vec2, inner: &Oval) -> Result<f64> {
    let (fwd, bwd) = match inner.tangent_points_from_external(outer_point) {
        Err(Error::PointInside { .. }) => return Err(Error::NotNested("point lies inside the inner curve".into())),
        r => r?,
    };
    let near_end = crate::geometry::oval::lift_after(fwd, bwd);
    let near = inner.arclength(near_end) - inner.arclength(bwd);
    let (a, b) = (inner.position(fwd), inner.position(bwd));
    Ok(outer_point.distance(a) + outer_point.distance(b) + inner.total_length() - near)
}

/// Spread of the string length over `n` points of `outer`; zero when `outer` is obtained from
/// `inner` by the string construction.
pub fn string_defect(outer: &Oval, inner: &Oval, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    for i in 0..64 {
        let p = inner.position(TAU * i as f64 / 64.0);
        if !outer.contains(p) {
            return Err(Error::NotNested("inner curve leaves the outer one".into()));
        }
    }
    let lengths: Vec<f64> = (0..n)
        .map(|i| string_length(outer.position(TAU * i as f64 / n as f64), inner))
        .collect::<Result<_>>()?;
    let (lo, hi) = lengths.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &l| (acc.0.min(l), acc.1.max(l)));
    Ok(hi - lo)
}
