use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geometry::Oval;
use crate::maps::circle_map::{circle_map_f, CircleMapMode};
use crate::vec2::{wrap_to_pi, Vec2};
use crate::{Error, Result};

const SCAN_POINTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobiusCheck {
    pub fixed_points: Vec<f64>,
    pub multipliers: Vec<f64>,
    /// `λ₁ λ₂ - 1`.
    pub product_defect: f64,
}

/// Locate the fixed points of the two-pencil map and compare their multipliers.
///
/// A Möbius map of the circle with two fixed points has reciprocal multipliers.
pub fn mobius_fixed_point_check(oval: &Oval, p: Vec2, q: Vec2) -> Result<MobiusCheck> {
    let mode = CircleMapMode::Pencil { p: p.to_array(), q: q.to_array() };
    let g = |x: f64| -> Option<f64> { circle_map_f(oval, &mode, x).ok().map(|y| wrap_to_pi(y - x)) };
    let h = TAU / SCAN_POINTS as f64;
    let values: Vec<Option<f64>> = (0..=SCAN_POINTS).map(|i| g(h * i as f64)).collect();
    let mut fixed = Vec::new();
    for i in 0..SCAN_POINTS {
        let (Some(a), Some(b)) = (values[i], values[i + 1]) else { continue };
        // a jump by about 2π is the branch cut of the wrapped displacement, not a root
        if (a - b).abs() > 1.0 {
            continue;
        }
        if a == 0.0 {
            fixed.push(h * i as f64);
        } else if a * b < 0.0 {
            let (mut lo, mut hi) = (h * i as f64, h * (i + 1) as f64);
            let mut glo = a;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let Some(gm) = g(mid) else { break };
                if (gm < 0.0) == (glo < 0.0) && gm != 0.0 {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            fixed.push(0.5 * (lo + hi));
        }
    }
    if fixed.len() != 2 {
        return Err(Error::FixedPointCountMismatch { found: fixed.len() });
    }
    let lifted = |x: f64, x0: f64| -> Result<f64> {
        let y = circle_map_f(oval, &mode, x)?;
        Ok(x0 + wrap_to_pi(y - x0))
    };
    let mut multipliers = Vec::new();
    for &x in &fixed {
        let d = |eps: f64| -> Result<f64> { Ok((lifted(x + eps, x)? - lifted(x - eps, x)?) / (2.0 * eps)) };
        let (d1, d2) = (d(1e-5)?, d(5e-6)?);
        multipliers.push((4.0 * d2 - d1) / 3.0);
    }
    Ok(MobiusCheck { product_defect: multipliers[0] * multipliers[1] - 1.0, fixed_points: fixed, multipliers })
}
