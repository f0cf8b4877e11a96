use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::maps::PlanarMap;
use crate::{Error, Result};

/// Tolerance for calling two periodic orbits the same.
pub const ORBIT_MATCH_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { max_iterations: 60, tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    /// The `n` states of the orbit, starting from the converged fixed point.
    pub states: Vec<[f64; 2]>,
    /// `|F^n(x) - x - k·period|` at the solution.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSearch {
    pub orbits: Vec<PeriodicOrbit>,
    /// Seeds for which the solver did not converge.
    pub failures: usize,
}

fn displacement<M: PlanarMap + ?Sized>(map: &M, x: [f64; 2], n: usize, k: i64) -> Result<[f64; 2]> {
    let p = map.period();
    let mut y = x;
    for _ in 0..n {
        y = map.apply(y)?;
    }
    Ok([y[0] - x[0] - k as f64 * p[0], y[1] - x[1] - k as f64 * p[1]])
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn solve_seed<M: PlanarMap + ?Sized>(map: &M, n: usize, k: i64, seed: [f64; 2], opts: SearchOptions) -> Result<PeriodicOrbit> {
    let scale = map.scale();
    let fail = Error::NoConvergence { operation: "periodic_orbit_search" };
    let mut x = seed;
    let mut g = displacement(map, x, n, k)?;
    for iteration in 0..=opts.max_iterations {
        if norm(g) < opts.tolerance {
            let mut states = vec![x];
            for _ in 1..n {
                let last = *states.last().unwrap();
                states.push(map.apply(last)?);
            }
            return Ok(PeriodicOrbit { states, residual: norm(g) });
        }
        if iteration == opts.max_iterations {
            break;
        }
        let mut jac = Matrix2::zeros();
        for j in 0..2 {
            let h = 1e-7 * scale[j];
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let (gp, gm) = (displacement(map, xp, n, k)?, displacement(map, xm, n, k)?);
            jac[(0, j)] = (gp[0] - gm[0]) / (2.0 * h);
            jac[(1, j)] = (gp[1] - gm[1]) / (2.0 * h);
        }
        let step = jac
            .svd(true, true)
            .solve(&Vector2::new(-g[0], -g[1]), 1e-10 * jac.norm())
            .map_err(|_| fail.clone())?;
        // damped line search on the residual norm
        let mut lambda = 1.0;
        let current = norm(g);
        let mut accepted = false;
        while lambda > 1e-6 {
            let trial = [x[0] + lambda * step[0], x[1] + lambda * step[1]];
            if let Ok(gt) = displacement(map, trial, n, k) {
                if norm(gt) < current || norm(gt) < opts.tolerance {
                    x = trial;
                    g = gt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(fail);
        }
    }
    Err(fail)
}

/// Reduce states to the fundamental domain along the first coordinate and sort them.
fn canonical<M: PlanarMap + ?Sized>(map: &M, states: &[[f64; 2]], reverse: bool) -> Option<Vec<[f64; 2]>> {
    let p = map.period();
    let mut out = Vec::with_capacity(states.len());
    for &s in states {
        let mut s = if reverse { map.reversal(s)? } else { s };
        if p[0] > 0.0 {
            let turns = (s[0] / p[0]).floor();
            s[0] -= turns * p[0];
            s[1] -= turns * p[1];
        }
        out.push(s);
    }
    out.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    Some(out)
}

fn same_multiset(a: &[[f64; 2]], b: &[[f64; 2]], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x[0] - y[0]).abs() <= tol && (x[1] - y[1]).abs() <= tol)
}

/// Fixed points of `F^n` in rotation class `k`, one per orbit, found by damped Newton
/// iterations with finite-difference Jacobians from every seed.
///
/// Orbits equal up to cyclic shift or time reversal are reported once; results are sorted by
/// their canonical state lists and do not depend on thread scheduling.
pub fn periodic_orbit_search<M: PlanarMap + ?Sized>(
    map: &M,
    n: usize,
    k: i64,
    seeds: &[[f64; 2]],
    opts: SearchOptions,
) -> Result<PeriodicSearch> {
    if n < 1 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    let results: Vec<Result<PeriodicOrbit>> = seeds.par_iter().map(|&s| solve_seed(map, n, k, s, opts)).collect();
    let mut failures = 0;
    let mut found: Vec<(Vec<[f64; 2]>, PeriodicOrbit)> = Vec::new();
    for r in results {
        match r {
            Ok(orbit) => {
                let Some(key) = canonical(map, &orbit.states, false) else { continue };
                let rev = canonical(map, &orbit.states, true);
                let duplicate = found.iter().any(|(other, _)| {
                    same_multiset(other, &key, ORBIT_MATCH_TOL)
                        || rev.as_ref().is_some_and(|r| same_multiset(other, r, ORBIT_MATCH_TOL))
                });
                if !duplicate {
                    found.push((key, orbit));
                }
            }
            Err(_) => failures += 1,
        }
    }
    found.sort_by(|a, b| {
        a.0.iter()
            .flatten()
            .zip(b.0.iter().flatten())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(PeriodicSearch { orbits: found.into_iter().map(|(_, o)| o).collect(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Oval;
    use crate::maps::{BirkhoffMap, Lifted};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn circle_diameters() {
        let c = Oval::circle(1.0).unwrap();
        let b = BirkhoffMap { oval: &c };
        let map = Lifted(&b);
        let seeds = [[0.3, 1.4], [2.0, 1.7]];
        let res = periodic_orbit_search(&map, 2, 1, &seeds, SearchOptions::default()).unwrap();
        assert_eq!(res.failures, 0);
        assert_eq!(res.orbits.len(), 2);
        for o in &res.orbits {
            assert!((o.states[0][1] - FRAC_PI_2).abs() < 1e-9);
            assert!((o.states[1][0] - o.states[0][0] - PI).abs() < 1e-9);
        }
    }
}
