use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::Oval;
use crate::vec2::Vec2;
use crate::{Error, Result};

/// Critical value of the perimeter or area functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub period: usize,
    pub class: usize,
    pub value: f64,
    /// Curve parameters of the vertices (length) or tangency points (area).
    pub params: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Number of rotated regular configurations used as seeds.
    pub seeds: usize,
    pub ascent_steps: usize,
    pub newton_steps: usize,
    pub tolerance: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { seeds: 8, ascent_steps: 200, newton_steps: 40, tolerance: 1e-9 }
    }
}

/// One variational problem on `n` lifted parameters with `t_{n} = t_0 + 2πk`.
trait Functional: Sync {
    fn value(&self, t: &[f64]) -> f64;
    fn gradient(&self, t: &[f64]) -> Vec<f64>;
    /// Geometric defect of the periodicity law at `t`.
    fn residual(&self, t: &[f64]) -> f64;
    /// `+1` to ascend during the preliminary phase, `-1` to descend.
    fn ascent_sign(&self) -> f64;
}

fn next_param(t: &[f64], i: usize, k: usize) -> f64 {
    let n = t.len();
    if i + 1 < n {
        t[i + 1]
    } else {
        t[0] + TAU * k as f64
    }
}

fn prev_param(t: &[f64], i: usize, k: usize) -> f64 {
    let n = t.len();
    if i > 0 {
        t[i - 1]
    } else {
        t[n - 1] - TAU * k as f64
    }
}

struct Perimeter<'a> {
    oval: &'a Oval,
    k: usize,
}

impl Perimeter<'_> {
    fn chord(&self, a: f64, b: f64) -> Vec2 {
        self.oval.position(b) - self.oval.position(a)
    }
}

impl Functional for Perimeter<'_> {
    fn value(&self, t: &[f64]) -> f64 {
        (0..t.len()).map(|i| self.chord(t[i], next_param(t, i, self.k)).norm()).sum()
    }

    fn gradient(&self, t: &[f64]) -> Vec<f64> {
        (0..t.len())
            .map(|i| {
                let u_in = self.chord(prev_param(t, i, self.k), t[i]).normalized();
                let u_out = self.chord(t[i], next_param(t, i, self.k)).normalized();
                self.oval.velocity(t[i]).dot(u_in - u_out)
            })
            .collect()
    }

    fn residual(&self, t: &[f64]) -> f64 {
        (0..t.len())
            .map(|i| {
                let u_in = self.chord(prev_param(t, i, self.k), t[i]).normalized();
                let u_out = self.chord(t[i], next_param(t, i, self.k)).normalized();
                self.oval.unit_tangent(t[i]).dot(u_in - u_out).abs()
            })
            .fold(0.0, f64::max)
    }

    fn ascent_sign(&self) -> f64 {
        1.0
    }
}

struct Area<'a> {
    oval: &'a Oval,
    k: usize,
}

impl Area<'_> {
    /// Intersection of the tangent lines at `a` and `b`.
    fn vertex(&self, a: f64, b: f64) -> Option<Vec2> {
        let (p, q) = (self.oval.position(a), self.oval.position(b));
        let (u, w) = (self.oval.unit_tangent(a), self.oval.unit_tangent(b));
        let det = u.cross(w);
        if det.abs() < 1e-14 {
            return None;
        }
        Some(p + u * ((q - p).cross(w) / det))
    }

    fn vertices(&self, t: &[f64]) -> Option<Vec<Vec2>> {
        (0..t.len()).map(|i| self.vertex(t[i], next_param(t, i, self.k))).collect()
    }

    /// Signed distances from the tangency point to the following and preceding vertices.
    fn arms(&self, t: &[f64], i: usize) -> Option<(f64, f64)> {
        let p = self.oval.position(t[i]);
        let u = self.oval.unit_tangent(t[i]);
        let fwd = self.vertex(t[i], next_param(t, i, self.k))?;
        let back = self.vertex(prev_param(t, i, self.k), t[i])?;
        Some(((fwd - p).dot(u), (p - back).dot(u)))
    }
}

impl Functional for Area<'_> {
    fn value(&self, t: &[f64]) -> f64 {
        let Some(v) = self.vertices(t) else { return f64::NAN };
        let n = v.len();
        0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
    }

    fn gradient(&self, t: &[f64]) -> Vec<f64> {
        // turning the tangent line at t_i by dφ changes the area by (b² - f²)/2 dφ
        (0..t.len())
            .map(|i| {
                let Some((f, b)) = self.arms(t, i) else { return f64::NAN };
                let v = self.oval.velocity(t[i]);
                let dphi = v.cross(self.oval.acceleration(t[i])) / v.norm_sq();
                0.5 * (b * b - f * f) * dphi
            })
            .collect()
    }

    fn residual(&self, t: &[f64]) -> f64 {
        (0..t.len())
            .map(|i| match self.arms(t, i) {
                Some((f, b)) => 0.5 * (f - b).abs(),
                None => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    fn ascent_sign(&self) -> f64 {
        -1.0
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton on the gradient with a finite-difference Hessian and SVD pseudo-inverse.
fn polish<F: Functional>(f: &F, mut t: Vec<f64>, opts: &SpectrumOptions) -> Option<Vec<f64>> {
    let n = t.len();
    let mut g = f.gradient(&t);
    for _ in 0..opts.newton_steps {
        if f.residual(&t) < opts.tolerance {
            return Some(t);
        }
        let mut hess = DMatrix::zeros(n, n);
        let h = 1e-6;
        for j in 0..n {
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[j] += h;
            tm[j] -= h;
            let (gp, gm) = (f.gradient(&tp), f.gradient(&tm));
            for i in 0..n {
                hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let hs = 0.5 * (&hess + hess.transpose());
        let rhs = DVector::from_iterator(n, g.iter().map(|x| -x));
        let step = hs.clone().svd(true, true).solve(&rhs, 1e-9 * hs.norm().max(1e-300)).ok()?;
        let current = norm(&g);
        let mut lambda = 1.0;
        let mut moved = false;
        while lambda > 1e-6 {
            let trial: Vec<f64> = t.iter().zip(step.iter()).map(|(a, b)| a + lambda * b).collect();
            let gt = f.gradient(&trial);
            if gt.iter().all(|x| x.is_finite()) && norm(&gt) < current {
                t = trial;
                g = gt;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (f.residual(&t) < opts.tolerance).then_some(t)
}

/// Gradient ascent (or descent) with backtracking, to approach the extremal configuration.
fn climb<F: Functional>(f: &F, mut t: Vec<f64>, steps: usize) -> Vec<f64> {
    let sign = f.ascent_sign();
    let mut step = 0.1;
    let mut value = f.value(&t);
    for _ in 0..steps {
        let g = f.gradient(&t);
        let gn = norm(&g);
        if !(gn > 1e-13) {
            break;
        }
        loop {
            let trial: Vec<f64> = t.iter().zip(&g).map(|(a, b)| a + sign * step * b / gn).collect();
            let v = f.value(&trial);
            if v.is_finite() && sign * (v - value) > 0.0 {
                t = trial;
                value = v;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                return t;
            }
        }
    }
    t
}

fn ordered(t: &[f64], k: usize) -> bool {
    let n = t.len();
    (0..n).all(|i| {
        let gap = next_param(t, i, k) - t[i];
        gap > 1e-6 && gap < TAU
    })
}

fn spectrum<F: Functional>(f: &F, oval: &Oval, n: usize, k: usize, opts: &SpectrumOptions) -> Result<Vec<SpectrumEntry>> {
    let seeds: Vec<Vec<f64>> = (0..opts.seeds.max(1))
        .map(|j| {
            let t0 = TAU * j as f64 / (opts.seeds.max(1) * n) as f64;
            (0..n).map(|i| t0 + TAU * (k * i) as f64 / n as f64).collect()
        })
        .collect();
    let candidates: Vec<Vec<f64>> = seeds
        .par_iter()
        .flat_map_iter(|seed| {
            let climbed = climb(f, seed.clone(), opts.ascent_steps);
            [polish(f, climbed, opts), polish(f, seed.clone(), opts)].into_iter().flatten()
        })
        .collect();
    let scale = oval.diameter().max(1e-300);
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for t in candidates {
        if !ordered(&t, k) {
            continue;
        }
        let value = f.value(&t);
        if entries.iter().any(|e| (e.value - value).abs() <= 1e-9 * scale * n as f64) {
            continue;
        }
        entries.push(SpectrumEntry { period: n, class: k, value, residual: f.residual(&t), params: t });
    }
    if entries.is_empty() {
        return Err(Error::NoConvergence { operation: "spectrum" });
    }
    entries.sort_by(|a, b| b.value.total_cmp(&a.value));
    Ok(entries)
}

fn check_class(n: usize, k: usize, min_n: usize) -> Result<()> {
    if n < min_n {
        return Err(Error::InvalidArgument(format!("period must be at least {min_n}, got {n}")));
    }
    if k < 1 || 2 * k > n {
        return Err(Error::InvalidArgument(format!("rotation class must satisfy 1 <= k <= n/2, got k = {k}")));
    }
    Ok(())
}

/// Critical perimeters of inscribed `n`-gons winding `k` times, sorted by decreasing value.
pub fn variational_length_orbits(oval: &Oval, n: usize, k: usize, opts: SpectrumOptions) -> Result<Vec<SpectrumEntry>> {
    check_class(n, k, 2)?;
    spectrum(&Perimeter { oval, k }, oval, n, k, &opts)
}

/// Critical areas of circumscribed `n`-gons winding `k` times, sorted by decreasing value.
pub fn variational_area_orbits(oval: &Oval, n: usize, k: usize, opts: SpectrumOptions) -> Result<Vec<SpectrumEntry>> {
    check_class(n, k, 3)?;
    if 2 * k == n {
        return Err(Error::InvalidArgument("circumscribed polygons need k < n/2".into()));
    }
    spectrum(&Area { oval, k }, oval, n, k, &opts)
}

/// Perimeter of the inscribed polygon with vertices at the given parameters.
pub fn inscribed_perimeter(oval: &Oval, params: &[f64]) -> f64 {
    let n = params.len();
    (0..n).map(|i| oval.position(params[i]).distance(oval.position(params[(i + 1) % n]))).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_square_and_triangle() {
        let c = Oval::circle(1.0).unwrap();
        let len = variational_length_orbits(&c, 4, 1, SpectrumOptions::default()).unwrap();
        assert!((len[0].value - 8.0 * (PI / 4.0).sin()).abs() < 1e-9);
        let area = variational_area_orbits(&c, 4, 1, SpectrumOptions::default()).unwrap();
        assert!((area[0].value - 4.0).abs() < 1e-9);
    }

    #[test]
    fn area_gradient_matches_finite_differences() {
        let e = Oval::ellipse(2.0, 1.0).unwrap();
        let f = Area { oval: &e, k: 1 };
        let t = vec![0.1, 2.0, 4.3];
        let g = f.gradient(&t);
        for i in 0..3 {
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[i] += 1e-6;
            tm[i] -= 1e-6;
            let fd = (f.value(&tp) - f.value(&tm)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6, "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn rejects_bad_classes() {
        let c = Oval::circle(1.0).unwrap();
        assert!(variational_length_orbits(&c, 1, 1, SpectrumOptions::default()).is_err());
        assert!(variational_area_orbits(&c, 4, 2, SpectrumOptions::default()).is_err());
    }
}
