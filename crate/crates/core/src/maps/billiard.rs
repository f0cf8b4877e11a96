use crate::geometry::Oval;
use crate::maps::{reduce_lift, CylinderMap, CylinderStep, PhasePoint};
use crate::vec2::normalize_angle;
use crate::{Error, Result, GRAZING_SINE};

/// Lifted impact parameter, lifted arclength and incidence angle of the next bounce.
fn bounce(oval: &Oval, p: PhasePoint) -> Result<(f64, f64)> {
    if !(p.alpha.sin() >= GRAZING_SINE) || !(p.alpha > 0.0 && p.alpha < std::f64::consts::PI) {
        return Err(Error::TangentialRay { sine: p.alpha.sin() });
    }
    let t0 = oval.param_of_arclength(p.s);
    let theta = oval.tangent_angle(t0) + p.alpha;
    let t1 = oval.second_intersection(t0, theta)?;
    let alpha1 = normalize_angle(oval.tangent_angle(t1) - theta);
    let s1 = oval.arclength(t1) - oval.arclength(t0) + p.s;
    Ok((s1, alpha1))
}

/// Billiard map `(s, α) ↦ (s₁, α₁)`.
pub fn birkhoff_map(oval: &Oval, p: PhasePoint) -> Result<CylinderStep> {
    let (s1, alpha1) = bounce(oval, p)?;
    let (s, winding) = reduce_lift(s1, oval.total_length());
    Ok(CylinderStep { point: PhasePoint::new(s, alpha1), winding })
}

/// Billiard map followed by the shift `s ↦ s + d cot α` along the boundary.
pub fn puck_map(oval: &Oval, d: f64, p: PhasePoint) -> Result<CylinderStep> {
    if !(d >= 0.0) {
        return Err(Error::InvalidArgument(format!("puck height must be non-negative, got {d}")));
    }
    let (s1, alpha1) = bounce(oval, p)?;
    let sine = alpha1.sin();
    if sine < GRAZING_SINE {
        return Err(Error::TangentialRay { sine });
    }
    let shifted = if d == 0.0 { s1 } else { s1 + d * alpha1.cos() / sine };
    let (s, winding) = reduce_lift(shifted, oval.total_length());
    Ok(CylinderStep { point: PhasePoint::new(s, alpha1), winding })
}

/// Largest deviation `|α₁ - δ|` over chords launched at angle `delta` from `n_samples`
/// equally spaced boundary points.
pub fn gutkin_defect(oval: &Oval, delta: f64, n_samples: usize) -> Result<f64> {
    if !(delta > 0.0 && delta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, π/2), got {delta}")));
    }
    let l = oval.total_length();
    let mut worst: f64 = 0.0;
    for i in 0..n_samples {
        let s = l * i as f64 / n_samples as f64;
        let (_, a1) = bounce(oval, PhasePoint::new(s, delta))?;
        worst = worst.max((a1 - delta).abs());
    }
    Ok(worst)
}

pub struct BirkhoffMap<'a> {
    pub oval: &'a Oval,
}

impl CylinderMap for BirkhoffMap<'_> {
    fn total_length(&self) -> f64 {
        self.oval.total_length()
    }

    fn step(&self, p: PhasePoint) -> Result<CylinderStep> {
        birkhoff_map(self.oval, p)
    }

    fn time_reversible(&self) -> bool {
        true
    }
}

pub struct PuckMap<'a> {
    pub oval: &'a Oval,
    pub height: f64,
}

impl CylinderMap for PuckMap<'_> {
    fn total_length(&self) -> f64 {
        self.oval.total_length()
    }

    fn step(&self, p: PhasePoint) -> Result<CylinderStep> {
        puck_map(self.oval, self.height, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn circle_inscribed_angle() {
        let c = Oval::circle(1.0).unwrap();
        let r = birkhoff_map(&c, PhasePoint::new(0.0, PI / 3.0)).unwrap();
        assert!((r.point.s - 2.0 * PI / 3.0).abs() < 1e-14);
        assert!((r.point.alpha - PI / 3.0).abs() < 1e-14);
        let r = birkhoff_map(&c, PhasePoint::new(0.0, FRAC_PI_2)).unwrap();
        assert!((r.point.s - PI).abs() < 1e-14 && r.winding == 0);
    }

    #[test]
    fn winding_counts_full_turns() {
        let c = Oval::circle(1.0).unwrap();
        let r = birkhoff_map(&c, PhasePoint::new(5.0, 1.0)).unwrap();
        assert_eq!(r.winding, 1);
        assert!((r.point.s - (7.0 - 2.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn puck_examples() {
        let c = Oval::circle(1.0).unwrap();
        let r = puck_map(&c, 1.0, PhasePoint::new(0.0, FRAC_PI_2)).unwrap();
        assert!((r.point.s - PI).abs() < 1e-14);
        let r = puck_map(&c, 1.0, PhasePoint::new(0.0, FRAC_PI_4)).unwrap();
        assert!((r.point.s - (FRAC_PI_2 + 1.0)).abs() < 1e-14);
        assert!((r.point.alpha - FRAC_PI_4).abs() < 1e-14);
    }

    #[test]
    fn grazing_and_bad_inputs() {
        let c = Oval::circle(1.0).unwrap();
        assert!(matches!(birkhoff_map(&c, PhasePoint::new(0.0, 1e-12)), Err(Error::TangentialRay { .. })));
        assert!(puck_map(&c, -1.0, PhasePoint::new(0.0, 1.0)).is_err());
        assert!(gutkin_defect(&c, FRAC_PI_2, 10).is_err());
    }
}
