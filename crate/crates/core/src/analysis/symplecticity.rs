use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::maps::{CylinderMap, CylinderStep, PhasePoint};
use crate::Result;

use super::lyapunov::FD_STEP;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticityReport {
    /// `max |det J - 1|` over the samples.
    pub max_defect: f64,
    pub location: PhasePoint,
    pub samples: usize,
}

/// Jacobian of a cylinder map in the coordinates `(s, -cos α)`: central differences,
/// Richardson-extrapolated once.
pub fn jacobian_s_cos<M: CylinderMap + ?Sized>(map: &M, p: PhasePoint) -> Result<[[f64; 2]; 2]> {
    let image = |s: f64, c: f64| -> Result<[f64; 2]> {
        let (s1, a1) = map.step_lifted(s, (-c).acos())?;
        Ok([s1, -a1.cos()])
    };
    let c0 = -p.alpha.cos();
    let hs = FD_STEP * map.total_length() / std::f64::consts::TAU;
    let hc = FD_STEP;
    let column = |ds: f64, dc: f64| -> Result<[f64; 2]> {
        let one = |k: f64| -> Result<[f64; 2]> {
            let f = image(p.s + k * ds, c0 + k * dc)?;
            let b = image(p.s - k * ds, c0 - k * dc)?;
            Ok([(f[0] - b[0]) / (2.0 * k), (f[1] - b[1]) / (2.0 * k)])
        };
        let d1 = one(1.0)?;
        let d2 = one(0.5)?;
        Ok([(4.0 * d2[0] - d1[0]) / 3.0, (4.0 * d2[1] - d1[1]) / 3.0])
    };
    let js = column(hs, 0.0)?;
    let jc = column(0.0, hc)?;
    Ok([[js[0] / hs, jc[0] / hc], [js[1] / hs, jc[1] / hc]])
}

pub fn symplecticity_defect<M: CylinderMap + ?Sized>(map: &M, samples: &[PhasePoint]) -> Result<SymplecticityReport> {
    let mut worst = SymplecticityReport { max_defect: 0.0, location: samples.first().copied().unwrap_or(PhasePoint::new(0.0, 0.0)), samples: samples.len() };
    for &p in samples {
        let j = jacobian_s_cos(map, p)?;
        let defect = (j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs();
        if defect > worst.max_defect {
            worst.max_defect = defect;
            worst.location = p;
        }
    }
    Ok(worst)
}

/// Uniform samples in `[0, L) × [alpha_lo, alpha_hi]`.
pub fn sample_phase_region<R: Rng + ?Sized>(rng: &mut R, length: f64, alpha_lo: f64, alpha_hi: f64, n: usize) -> Vec<PhasePoint> {
    (0..n)
        .map(|_| PhasePoint::new(rng.random_range(0.0..length), rng.random_range(alpha_lo..=alpha_hi)))
        .collect()
}

/// A map followed by the shear `α ↦ α + rate · s` in the input arclength; not symplectic.
pub struct AlphaShear<M> {
    pub inner: M,
    pub rate: f64,
}

impl<M: CylinderMap> CylinderMap for AlphaShear<M> {
    fn total_length(&self) -> f64 {
        self.inner.total_length()
    }

    fn step(&self, p: PhasePoint) -> Result<CylinderStep> {
        let mut out = self.inner.step(p)?;
        out.point.alpha += self.rate * p.s;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Oval;
    use crate::maps::BirkhoffMap;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circle_birkhoff_is_symplectic_and_shear_is_not() {
        let c = Oval::circle(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples = sample_phase_region(&mut rng, c.total_length(), 0.2, 2.9, 50);
        let ok = symplecticity_defect(&BirkhoffMap { oval: &c }, &samples).unwrap();
        assert!(ok.max_defect < 5e-6, "{}", ok.max_defect);
        let bad = symplecticity_defect(&AlphaShear { inner: BirkhoffMap { oval: &c }, rate: 0.1 }, &samples).unwrap();
        assert!(bad.max_defect > 0.05);
    }
}
