use serde::{Deserialize, Serialize};

use crate::maps::PlanarMap;
use crate::{Error, Result};

/// Relative finite-difference step.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    pub renorm_every: usize,
    pub burn_in: usize,
    /// Interval between recorded running estimates.
    pub record_every: usize,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions { renorm_every: 16, burn_in: 1000, record_every: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub steps: usize,
    /// `(step, estimate)` after burn-in.
    pub running: Vec<(usize, f64)>,
}

impl LyapunovEstimate {
    /// Running estimate recorded at `step`, if any.
    pub fn at(&self, step: usize) -> Option<f64> {
        self.running.iter().find(|(k, _)| *k == step).map(|(_, v)| *v)
    }
}

fn wrap<M: PlanarMap + ?Sized>(map: &M, mut x: [f64; 2]) -> [f64; 2] {
    let p = map.period();
    if p[0] > 0.0 {
        let turns = (x[0] / p[0]).floor();
        x[0] -= turns * p[0];
        x[1] -= turns * p[1];
    }
    x
}

/// Derivative of `map` at `x` along `v`: central differences, Richardson-extrapolated once.
/// Returns the image of `x` too.
pub fn directional_derivative<M: PlanarMap + ?Sized>(map: &M, x: [f64; 2], v: [f64; 2]) -> Result<([f64; 2], [f64; 2])> {
    let scale = map.scale();
    let h = FD_STEP;
    let at = |eps: f64| -> Result<[f64; 2]> {
        map.apply([x[0] + eps * v[0] * scale[0], x[1] + eps * v[1] * scale[1]])
    };
    let fx = map.apply(x)?;
    let diff = |eps: f64| -> Result<[f64; 2]> {
        let (p, m) = (at(eps)?, at(-eps)?);
        Ok([(p[0] - m[0]) / (2.0 * eps), (p[1] - m[1]) / (2.0 * eps)])
    };
    let d1 = diff(h)?;
    let d2 = diff(0.5 * h)?;
    // derivative with respect to the scaled coordinates; undo the scaling of the output
    let d = [
        (4.0 * d2[0] - d1[0]) / 3.0 / scale[0],
        (4.0 * d2[1] - d1[1]) / 3.0 / scale[1],
    ];
    Ok((fx, d))
}

/// Top Lyapunov exponent by tangent-vector iteration with finite-difference derivatives.
///
/// Tangent vectors live in the scaled coordinates `x_i / scale_i`.
pub fn lyapunov_exponent<M: PlanarMap + ?Sized>(map: &M, x0: [f64; 2], n: usize, opts: LyapunovOptions) -> Result<LyapunovEstimate> {
    let mut x = x0;
    for k in 0..opts.burn_in {
        x = wrap(map, map.apply(x).map_err(|_| Error::Degenerate { steps: k })?);
    }
    let mut v = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
    let mut log_sum = 0.0;
    let mut growth = 1.0;
    let mut running = Vec::new();
    for k in 1..=n {
        let (fx, d) = directional_derivative(map, x, v).map_err(|_| Error::Degenerate { steps: opts.burn_in + k })?;
        x = wrap(map, fx);
        let norm = d[0].hypot(d[1]);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Degenerate { steps: opts.burn_in + k });
        }
        v = [d[0] / norm, d[1] / norm];
        growth *= norm;
        if k % opts.renorm_every.max(1) == 0 || k == n {
            log_sum += growth.ln();
            growth = 1.0;
        }
        if opts.record_every > 0 && k % opts.record_every == 0 {
            running.push((k, (log_sum + growth.ln()) / k as f64));
        }
    }
    Ok(LyapunovEstimate { value: log_sum / n as f64, steps: n, running })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Cat;

    impl PlanarMap for Cat {
        fn apply(&self, x: [f64; 2]) -> Result<[f64; 2]> {
            Ok([2.0 * x[0] + x[1], x[0] + x[1]])
        }
    }

    struct Rotation;

    impl PlanarMap for Rotation {
        fn apply(&self, x: [f64; 2]) -> Result<[f64; 2]> {
            let (s, c) = 0.7f64.sin_cos();
            Ok([c * x[0] - s * x[1], s * x[0] + c * x[1]])
        }
    }

    #[test]
    fn linear_hyperbolic_map() {
        // eigenvalue (3 + √5)/2 of [[2,1],[1,1]]
        let est = lyapunov_exponent(&Cat, [0.0, 0.0], 2000, LyapunovOptions { burn_in: 0, ..Default::default() }).unwrap();
        let expected = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((est.value - expected).abs() < 1e-3);
    }

    #[test]
    fn rotation_has_zero_exponent() {
        let est = lyapunov_exponent(&Rotation, [0.3, 0.1], 5000, LyapunovOptions::default()).unwrap();
        assert!(est.value.abs() < 1e-9);
    }
}
