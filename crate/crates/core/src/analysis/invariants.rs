use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::orbit::OrbitRecord;
use super::rotation::{rotation_number, RotationEstimate};
use crate::geometry::{Oval, Shape};
use crate::vec2::Vec2;
use crate::{Error, Result};

pub const DIAGNOSTIC_BINS: usize = 256;
pub const DIAGNOSTIC_MIN_STEPS: usize = 10_000;
/// Thickness threshold as a fraction of the full angle range `π`.
pub const DIAGNOSTIC_BAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    InvariantCurveLike,
    Scattered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveDiagnostic {
    pub graph_thickness: f64,
    pub rotation: Option<RotationEstimate>,
    pub verdict: Verdict,
    pub bins: usize,
    pub band: f64,
}

/// Bin the orbit by `s` and measure how far it is from the graph of a function `α(s)`.
///
/// In every bin the points are detrended by a least-squares quadratic and the spread of the
/// residuals is taken; the thickness is the largest spread over the bins.
pub fn invariant_curve_diagnostic(orbit: &OrbitRecord) -> Result<CurveDiagnostic> {
    let points: Vec<(f64, f64)> = orbit.states().filter_map(|s| s.as_phase()).map(|p| (p.s, p.alpha)).collect();
    if points.len() < DIAGNOSTIC_MIN_STEPS {
        return Err(Error::InsufficientData { needed: DIAGNOSTIC_MIN_STEPS, got: points.len() });
    }
    let length = orbit
        .parameter("period")
        .ok_or_else(|| Error::InvalidArgument("orbit has no period parameter".into()))?;
    let mut bins: Vec<Vec<(f64, f64)>> = vec![Vec::new(); DIAGNOSTIC_BINS];
    for &(s, a) in &points {
        let i = ((s / length * DIAGNOSTIC_BINS as f64) as usize).min(DIAGNOSTIC_BINS - 1);
        bins[i].push((s, a));
    }
    let mut thickness: f64 = 0.0;
    for bin in &bins {
        if bin.len() < 2 {
            continue;
        }
        let m = bin.len() as f64;
        let ms = bin.iter().map(|p| p.0).sum::<f64>() / m;
        let w = bin.iter().map(|p| (p.0 - ms).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut ata = Matrix3::zeros();
        let mut atb = Vector3::zeros();
        for p in bin {
            let x = (p.0 - ms) / w;
            let row = Vector3::new(1.0, x, x * x);
            ata += row * row.transpose();
            atb += row * p.1;
        }
        let c = ata.svd(true, true).solve(&atb, 1e-12).unwrap_or_else(|_| Vector3::new(bin[0].1, 0.0, 0.0));
        let (lo, hi) = bin.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, p| {
            let x = (p.0 - ms) / w;
            let r = p.1 - c[0] - c[1] * x - c[2] * x * x;
            (acc.0.min(r), acc.1.max(r))
        });
        thickness = thickness.max(hi - lo);
    }
    let band = DIAGNOSTIC_BAND * std::f64::consts::PI;
    Ok(CurveDiagnostic {
        graph_thickness: thickness,
        rotation: rotation_number(orbit).ok(),
        verdict: if thickness < band { Verdict::InvariantCurveLike } else { Verdict::Scattered },
        bins: DIAGNOSTIC_BINS,
        band,
    })
}

fn ellipse_axes(oval: &Oval) -> Result<(f64, f64)> {
    match *oval.shape() {
        Shape::Ellipse { a, b } if oval.transform().is_identity_linear() && oval.transform().b == Vec2::ZERO => Ok((a, b)),
        Shape::Circle { radius } if oval.transform().is_identity_linear() && oval.transform().b == Vec2::ZERO => Ok((radius, radius)),
        _ => Err(Error::InvalidArgument("confocal test needs a centred axis-aligned ellipse".into())),
    }
}

/// Confocal parameter `λ` of the conic `x²/(a²-λ) + y²/(b²-λ) = 1` tangent to every chord
/// of a Birkhoff orbit in the ellipse `x²/a² + y²/b² = 1`.
pub fn confocal_parameters(oval: &Oval, orbit: &OrbitRecord) -> Result<Vec<f64>> {
    let (a, b) = ellipse_axes(oval)?;
    orbit
        .states()
        .filter_map(|s| s.as_phase())
        .map(|p| {
            let t = oval.param_of_arclength(p.s);
            let x = oval.position(t);
            let u = Vec2::from_angle(oval.tangent_angle(t) + p.alpha);
            let n = u.perp();
            let dist = n.dot(x);
            Ok(a * a * n.x * n.x + b * b * n.y * n.y - dist * dist)
        })
        .collect()
}

/// Largest deviation of the chord confocal parameters from the one fitted on the first chord.
pub fn confocal_defect(oval: &Oval, orbit: &OrbitRecord) -> Result<f64> {
    let lambdas = confocal_parameters(oval, orbit)?;
    let first = *lambdas.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    Ok(lambdas.iter().map(|l| (l - first).abs()).fold(0.0, f64::max))
}

/// Value of the quadratic form `x²/a² + y²/b²` of the (affinely placed) ellipse at `p`.
pub fn homothety_value(oval: &Oval, p: Vec2) -> Result<f64> {
    let (a, b) = match *oval.shape() {
        Shape::Ellipse { a, b } => (a, b),
        Shape::Circle { radius } => (radius, radius),
        _ => return Err(Error::InvalidArgument("homothety form needs an ellipse".into())),
    };
    let q = oval.transform().inverse_apply(p);
    Ok((q.x / a).powi(2) + (q.y / b).powi(2))
}

/// Largest relative change of the homothety form along an outer-billiard orbit.
pub fn homothety_defect(oval: &Oval, orbit: &OrbitRecord) -> Result<f64> {
    let values: Vec<f64> = orbit
        .states()
        .filter_map(|s| s.as_point())
        .map(|p| homothety_value(oval, p))
        .collect::<Result<_>>()?;
    let first = *values.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    Ok(values.iter().map(|v| ((v - first) / first).abs()).fold(0.0, f64::max))
}
