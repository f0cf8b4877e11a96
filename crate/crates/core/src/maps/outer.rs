use crate::geometry::Oval;
use crate::maps::PlanarMap;
use crate::vec2::Vec2;
use crate::Result;

/// Outer billiard `A ↦ 2τ - A`, where `τ` is the forward (counterclockwise) tangency point.
pub fn outer_map(oval: &Oval, a: Vec2) -> Result<Vec2> {
    let (forward, _) = oval.tangent_points_from_external(a)?;
    Ok(oval.position(forward) * 2.0 - a)
}

pub struct OuterMap<'a> {
    pub oval: &'a Oval,
}

impl PlanarMap for OuterMap<'_> {
    fn apply(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        Ok(outer_map(self.oval, Vec2::from(x))?.to_array())
    }

    fn scale(&self) -> [f64; 2] {
        let d = self.oval.diameter();
        [d, d]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn circle_rotates_by_twice_the_tangency_angle() {
        let c = Oval::circle(1.0).unwrap();
        let b = outer_map(&c, Vec2::new(2.0, 0.0)).unwrap();
        assert!(b.distance(Vec2::new(-1.0, 3f64.sqrt())) < 1e-14);
        let a = Vec2::new(-2.3, 1.7);
        assert!((outer_map(&c, a).unwrap().norm() - a.norm()).abs() < 1e-14);
    }

    #[test]
    fn inside_is_rejected() {
        let c = Oval::circle(1.0).unwrap();
        assert!(matches!(outer_map(&c, Vec2::new(0.2, 0.1)), Err(Error::PointInside { .. })));
    }
}
