use serde::{Deserialize, Serialize};

use crate::geometry::Oval;
use crate::vec2::{normalize_angle, wrap_to_pi, Vec2};
use crate::{Error, Result, GRAZING_SINE};

const REFERENCE_POINTS: usize = 64;

/// The two chord families whose involutions are composed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircleMapMode {
    /// Lines of direction `psi1`, then lines of direction `psi2`.
    Parallel { psi1: f64, psi2: f64 },
    /// Lines through `p`, then lines through `q`.
    Pencil { p: [f64; 2], q: [f64; 2] },
}

enum Family {
    Direction(f64),
    Through(Vec2),
}

/// Other endpoint of the chord of the family through `position(x)`.
fn involution(oval: &Oval, family: &Family, x: f64) -> Result<f64> {
    let u = match family {
        Family::Direction(psi) => Vec2::from_angle(*psi),
        Family::Through(p) => {
            let d = *p - oval.position(x);
            if d.norm() < 1e-14 * oval.diameter() {
                return Err(Error::DegenerateChord("pencil centre lies on the curve point".into()));
            }
            d.normalized()
        }
    };
    let sine = oval.unit_tangent(x).cross(u);
    if sine.abs() < GRAZING_SINE {
        return Err(Error::TangentialRay { sine: sine.abs() });
    }
    let u = if sine > 0.0 { u } else { -u };
    Ok(normalize_angle(oval.second_intersection(x, u.angle())?))
}

/// `F(x)`: composition of the two chord involutions, as a parameter in `[0, 2π)`.
pub fn circle_map_f(oval: &Oval, mode: &CircleMapMode, x: f64) -> Result<f64> {
    let (f1, f2) = families(mode)?;
    let y = involution(oval, &f1, x)?;
    involution(oval, &f2, y)
}

fn families(mode: &CircleMapMode) -> Result<(Family, Family)> {
    match *mode {
        CircleMapMode::Parallel { psi1, psi2 } => {
            if (psi1 - psi2).sin().abs() < GRAZING_SINE {
                return Err(Error::InvalidArgument("the two directions must differ mod π".into()));
            }
            Ok((Family::Direction(psi1), Family::Direction(psi2)))
        }
        CircleMapMode::Pencil { p, q } => {
            if Vec2::from(p).distance(Vec2::from(q)) == 0.0 {
                return Err(Error::InvalidArgument("pencil centres must be distinct".into()));
            }
            Ok((Family::Through(Vec2::from(p)), Family::Through(Vec2::from(q))))
        }
    }
}

/// Lift of `F` to the real line chosen continuously around a reference displacement, taken at
/// the first of 64 equally spaced parameters where `F` is defined.
pub struct CircleMapF<'a> {
    pub oval: &'a Oval,
    pub mode: CircleMapMode,
    reference: f64,
}

impl<'a> CircleMapF<'a> {
    pub fn new(oval: &'a Oval, mode: CircleMapMode) -> Result<Self> {
        let mut first_err = None;
        for i in 0..REFERENCE_POINTS {
            let x = std::f64::consts::TAU * i as f64 / REFERENCE_POINTS as f64;
            match circle_map_f(oval, &mode, x) {
                Ok(y) => return Ok(CircleMapF { oval, mode, reference: normalize_angle(y - x) }),
                Err(e @ Error::InvalidArgument(_)) => return Err(e),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        Err(first_err.expect("at least one reference point"))
    }

    /// Lifted image: `x + Δ` with `Δ` within `π` of the reference displacement.
    pub fn lifted(&self, x: f64) -> Result<f64> {
        let y = circle_map_f(self.oval, &self.mode, normalize_angle(x))?;
        Ok(x + self.reference + wrap_to_pi(y - x - self.reference))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn circle_vertical_then_horizontal_is_half_turn() {
        let c = Oval::circle(1.0).unwrap();
        let mode = CircleMapMode::Parallel { psi1: FRAC_PI_2, psi2: 0.0 };
        let y = circle_map_f(&c, &mode, 0.4).unwrap();
        assert!((y - (0.4 + PI)).abs() < 1e-14);
    }

    #[test]
    fn circle_parallel_is_rigid_rotation() {
        let c = Oval::circle(1.0).unwrap();
        let mode = CircleMapMode::Parallel { psi1: 0.3, psi2: 1.1 };
        let f = CircleMapF::new(&c, mode).unwrap();
        let y = f.lifted(2.0).unwrap();
        assert!((y - (2.0 + 1.6)).abs() < 1e-13);
    }
}
