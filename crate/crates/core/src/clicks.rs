use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::roots::safeguarded_newton;
use crate::geometry::Oval;
use crate::vec2::Vec2;
use crate::{Error, Result};

/// Clicks closer than this are merged into one event.
pub const MERGE_TOL: f64 = 1e-12;
pub const MIN_HISTOGRAM_BINS: usize = 16;

/// A curve translated across the lattice `εℤ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClickCurve {
    Oval(Oval),
    Polyline { points: Vec<[f64; 2]>, closed: bool },
    Segment { a: [f64; 2], b: [f64; 2] },
}

impl ClickCurve {
    fn segments(&self) -> Vec<(Vec2, Vec2)> {
        match self {
            ClickCurve::Oval(_) => Vec::new(),
            ClickCurve::Segment { a, b } => vec![((*a).into(), (*b).into())],
            ClickCurve::Polyline { points, closed } => {
                let pts: Vec<Vec2> = points.iter().map(|&p| p.into()).collect();
                let mut segs: Vec<(Vec2, Vec2)> = pts.windows(2).map(|w| (w[0], w[1])).collect();
                if *closed && pts.len() > 2 {
                    segs.push((pts[pts.len() - 1], pts[0]));
                }
                segs
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    fn bounds(&self) -> (Vec2, Vec2) {
        match self {
            ClickCurve::Oval(o) => (
                Vec2::new(-o.support(Vec2::new(-1.0, 0.0)), -o.support(Vec2::new(0.0, -1.0))),
                Vec2::new(o.support(Vec2::new(1.0, 0.0)), o.support(Vec2::new(0.0, 1.0))),
            ),
            _ => self.segments().iter().flat_map(|&(a, b)| [a, b]).fold(
                (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
                |(lo, hi), p| (Vec2::new(lo.x.min(p.x), lo.y.min(p.y)), Vec2::new(hi.x.max(p.x), hi.y.max(p.y))),
            ),
        }
    }

    fn validate(&self) -> Result<()> {
        let pts: Vec<Vec2> = self.segments().iter().flat_map(|&(a, b)| [a, b]).collect();
        if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidCurve("non-finite vertex".into()));
        }
        match self {
            ClickCurve::Polyline { points, .. } if points.len() < 2 => {
                Err(Error::InvalidCurve("a polyline needs at least two points".into()))
            }
            ClickCurve::Segment { a, b } if a == b => Err(Error::InvalidCurve("segment has zero length".into())),
            _ => Ok(()),
        }
    }
}

/// Simultaneous clicks at one translation parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickEvent {
    pub lambda: f64,
    pub multiplicity: usize,
}

/// A straight piece parallel to the translation sliding over a lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEvent {
    pub start: f64,
    pub end: f64,
    pub lattice_point: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickTrain {
    pub epsilon: f64,
    pub direction: [f64; 2],
    /// Half-open window `[λ₀, λ₁)`.
    pub window: [f64; 2],
    pub curve: ClickCurve,
    pub clicks: Vec<ClickEvent>,
    pub intervals: Vec<IntervalEvent>,
}

impl ClickTrain {
    pub fn total_clicks(&self) -> usize {
        self.clicks.iter().map(|c| c.multiplicity).sum()
    }

    /// Clicks in `[a, b)`, as `(λ, multiplicity)`.
    pub fn clicks_in(&self, a: f64, b: f64) -> Vec<ClickEvent> {
        self.clicks.iter().copied().filter(|c| c.lambda >= a && c.lambda < b).collect()
    }

    /// RFC 4180 CSV with header `lambda,multiplicity`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,multiplicity\r\n");
        for c in &self.clicks {
            out.push_str(&format!("{},{}\r\n", c.lambda, c.multiplicity));
        }
        out
    }

    pub fn intervals_csv(&self) -> String {
        let mut out = String::from("lambda_start,lambda_end,x,y\r\n");
        for e in &self.intervals {
            out.push_str(&format!("{},{},{},{}\r\n", e.start, e.end, e.lattice_point[0], e.lattice_point[1]));
        }
        out
    }

    /// Everything except the click list, for the JSON header.
    pub fn header(&self) -> serde_json::Value {
        serde_json::json!({
            "epsilon": self.epsilon,
            "direction": self.direction,
            "window": self.window,
            "curve": self.curve,
            "clicks": self.clicks.len(),
            "total_multiplicity": self.total_clicks(),
            "intervals": self.intervals.len(),
        })
    }
}

/// Translation parameters `λ` with `p - λv` on the oval, for a lattice point `p`.
fn oval_clicks(oval: &Oval, p: Vec2, v: Vec2) -> Vec<f64> {
    let n = v.perp();
    let c = n.dot(p);
    let (hi, t_hi) = oval.support_with_param(n);
    let (lo_neg, t_lo) = oval.support_with_param(-n);
    let lo = -lo_neg;
    let tol = 1e-13 * oval.diameter();
    if c > hi + tol || c < lo - tol {
        return Vec::new();
    }
    let lam = |t: f64| v.dot(p - oval.position(t));
    if c >= hi - tol {
        return vec![lam(t_hi)];
    }
    if c <= lo + tol {
        return vec![lam(t_lo)];
    }
    let g = |t: f64| (n.dot(oval.position(t)) - c, n.dot(oval.velocity(t)));
    let t_up = crate::geometry::oval::lift_after(t_hi, t_lo);
    let t_down = crate::geometry::oval::lift_after(t_lo, t_up);
    [(t_lo, t_up, true), (t_up, t_down, false)]
        .into_iter()
        .filter_map(|(a, b, neg)| safeguarded_newton(g, a, b, neg, 1e-15 * TAU))
        .map(lam)
        .collect()
}

/// Clicks of a segment, or an interval when it is parallel to `v` and passes through `p`.
fn segment_clicks(a: Vec2, b: Vec2, p: Vec2, v: Vec2) -> (Vec<f64>, Option<(f64, f64)>) {
    let e = b - a;
    let den = v.cross(e);
    let scale = e.norm();
    if den.abs() <= 1e-14 * scale {
        // parallel: only a lattice point on the carrier line can be met
        if v.cross(p - a).abs() <= 1e-12 * scale.max(1.0) {
            let (la, lb) = (v.dot(p - a), v.dot(p - b));
            return (Vec::new(), Some((la.min(lb), la.max(lb))));
        }
        return (Vec::new(), None);
    }
    // p - λv = a + s e
    let w = p - a;
    let s = v.cross(w) / den;
    if !(-1e-14..=1.0 + 1e-14).contains(&s) {
        return (Vec::new(), None);
    }
    let lambda = e.cross(w) / e.cross(v);
    (vec![lambda], None)
}

/// All translation parameters `λ` in `[λ₀, λ₁)` at which `curve + λv` meets a point of `εℤ²`.
pub fn click_events(curve: &ClickCurve, epsilon: f64, v: Vec2, window: [f64; 2]) -> Result<ClickTrain> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if (v.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("direction must be a unit vector".into()));
    }
    if !(window[0].is_finite() && window[1].is_finite() && window[0] < window[1]) {
        return Err(Error::InvalidArgument("window must be a finite interval".into()));
    }
    curve.validate()?;
    let (bmin, bmax) = curve.bounds();
    let sweep = [v * window[0], v * window[1]];
    let lo = Vec2::new(bmin.x + sweep[0].x.min(sweep[1].x), bmin.y + sweep[0].y.min(sweep[1].y));
    let hi = Vec2::new(bmax.x + sweep[0].x.max(sweep[1].x), bmax.y + sweep[0].y.max(sweep[1].y));
    let (i0, i1) = ((lo.x / epsilon).floor() as i64 - 1, (hi.x / epsilon).ceil() as i64 + 1);
    let (j0, j1) = ((lo.y / epsilon).floor() as i64 - 1, (hi.y / epsilon).ceil() as i64 + 1);
    let segments = curve.segments();
    // roundoff must not move a click across a window edge
    let edge_tol = MERGE_TOL * window[0].abs().max(window[1].abs()).max(1.0);
    let in_window = |l: f64| l >= window[0] - edge_tol && l < window[1] - edge_tol;
    let snap = |l: f64| if (l - window[0]).abs() <= edge_tol { window[0] } else { l };
    let rows: Vec<(Vec<f64>, Vec<IntervalEvent>)> = (j0..=j1)
        .into_par_iter()
        .map(|j| {
            let mut clicks = Vec::new();
            let mut intervals = Vec::new();
            for i in i0..=i1 {
                let p = Vec2::new(epsilon * i as f64, epsilon * j as f64);
                let mut here: Vec<f64> = match curve {
                    ClickCurve::Oval(o) => oval_clicks(o, p, v),
                    _ => {
                        let mut ls = Vec::new();
                        for &(a, b) in &segments {
                            let (l, iv) = segment_clicks(a, b, p, v);
                            ls.extend(l);
                            if let Some((s, e)) = iv {
                                if s < window[1] && e >= window[0] {
                                    intervals.push(IntervalEvent { start: s, end: e, lattice_point: p.to_array() });
                                }
                            }
                        }
                        ls
                    }
                };
                // a lattice point met at a shared polyline vertex clicks once
                here.sort_by(f64::total_cmp);
                here.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
                clicks.extend(here.into_iter().filter(|&l| in_window(l)).map(snap));
            }
            (clicks, intervals)
        })
        .collect();
    let mut all = Vec::new();
    let mut intervals = Vec::new();
    for (c, iv) in rows {
        all.extend(c);
        intervals.extend(iv);
    }
    all.sort_by(f64::total_cmp);
    let mut clicks: Vec<ClickEvent> = Vec::new();
    for l in all {
        match clicks.last_mut() {
            Some(last) if (l - last.lambda).abs() <= MERGE_TOL => last.multiplicity += 1,
            _ => clicks.push(ClickEvent { lambda: l, multiplicity: 1 }),
        }
    }
    intervals.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.lattice_point[0].total_cmp(&b.lattice_point[0])));
    Ok(ClickTrain { epsilon, direction: v.to_array(), window, curve: curve.clone(), clicks, intervals })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickHistogram {
    pub epsilon: f64,
    pub counts: Vec<usize>,
}

/// Click counts (with multiplicity) of `λ mod ε` over `bins` equal bins of `[0, ε)`.
pub fn click_histogram(train: &ClickTrain, bins: usize) -> Result<ClickHistogram> {
    if bins < MIN_HISTOGRAM_BINS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_HISTOGRAM_BINS} bins, got {bins}")));
    }
    let mut counts = vec![0; bins];
    for c in &train.clicks {
        let phase = c.lambda.rem_euclid(train.epsilon) / train.epsilon;
        counts[((phase * bins as f64) as usize).min(bins - 1)] += c.multiplicity;
    }
    Ok(ClickHistogram { epsilon: train.epsilon, counts })
}

/// Exponential sums `Σ exp(2πi k λ / ε)` over the clicks (with multiplicity), `k = 1..=max_harmonic`.
pub fn click_spectrum(train: &ClickTrain, max_harmonic: usize) -> Vec<Complex64> {
    (1..=max_harmonic)
        .map(|k| {
            train
                .clicks
                .iter()
                .map(|c| Complex64::from_polar(c.multiplicity as f64, TAU * k as f64 * c.lambda / train.epsilon))
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_row_clicks_once_with_multiplicity_three() {
        let seg = ClickCurve::Segment { a: [-1.0, 0.0], b: [1.0, 0.0] };
        let train = click_events(&seg, 1.0, Vec2::new(0.0, 1.0), [0.0, 1.0]).unwrap();
        assert_eq!(train.clicks, vec![ClickEvent { lambda: 0.0, multiplicity: 3 }]);
    }

    #[test]
    fn circle_clicks_at_zero() {
        let c = ClickCurve::Oval(Oval::circle(1.0).unwrap());
        let train = click_events(&c, 1.0, Vec2::new(1.0, 0.0), [0.0, 1.0]).unwrap();
        assert_eq!(train.clicks.len(), 1, "{:?}", train.clicks);
        assert!(train.clicks[0].lambda.abs() < 1e-12);
        // two tangential touches (j = ±1) and two crossings (j = 0, i = ±1)
        assert_eq!(train.clicks[0].multiplicity, 4);
    }

    #[test]
    fn parallel_segment_gives_interval() {
        let seg = ClickCurve::Segment { a: [0.0, 0.0], b: [0.5, 0.0] };
        let train = click_events(&seg, 1.0, Vec2::new(1.0, 0.0), [-2.0, 2.0]).unwrap();
        assert!(train.clicks.is_empty());
        assert!(!train.intervals.is_empty());
    }

    #[test]
    fn spectrum_of_simple_trains() {
        let mut train = click_events(&ClickCurve::Segment { a: [0.5, 0.5], b: [0.6, 0.6] }, 1.0, Vec2::new(1.0, 0.0), [0.0, 1.0]).unwrap();
        train.clicks = vec![ClickEvent { lambda: 0.0, multiplicity: 1 }];
        assert!(click_spectrum(&train, 4).iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        train.clicks.push(ClickEvent { lambda: 0.5, multiplicity: 1 });
        let s = click_spectrum(&train, 2);
        assert!(s[0].norm() < 1e-15);
        assert!((s[1] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        assert!(click_histogram(&train, 8).is_err());
        assert_eq!(click_histogram(&train, 16).unwrap().counts.iter().sum::<usize>(), 2);
    }
}
