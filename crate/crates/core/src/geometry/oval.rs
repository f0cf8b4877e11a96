use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::quadrature::gauss_panel;
use super::roots::{golden_max, safeguarded_newton};
use crate::vec2::{normalize_angle, Affine2, Vec2};
use crate::{Error, Result, GRAZING_SINE};

/// Cells of the uniform parameter grid used for bracketing roots.
const BRACKET_CELLS: usize = 256;
/// Panels of the arclength table.
const ARC_PANELS: usize = 512;
/// Samples used when validating convexity at construction.
const CONVEXITY_SAMPLES: usize = 2048;

/// Shape of a convex table in its own coordinates; the [`Oval`] places it in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// Two half-discs of `radius` joined by straight segments of length `2 * half_length`.
    Stadium { half_length: f64, radius: f64 },
    /// Support function `h(φ) = Σ cos[k] cos kφ + sin[k] sin kφ`; `sin[0]` must vanish.
    SupportFourier { cos: Vec<f64>, sin: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StadiumPiece {
    RightUpper,
    Top,
    Left,
    Bottom,
    RightLower,
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Circle { .. } => "circle",
            Shape::Ellipse { .. } => "ellipse",
            Shape::Stadium { .. } => "stadium",
            Shape::SupportFourier { .. } => "support_fourier",
        }
    }

    /// `h, h', h'', h'''` at `phi` for a support-function shape.
    pub fn support_derivatives(&self, phi: f64) -> Option<[f64; 4]> {
        match self {
            Shape::SupportFourier { cos, sin } => Some(Self::support_derivs(cos, sin, phi)),
            _ => None,
        }
    }

    /// Random support-function shape `h = 1 + Σ_{k=2..=modes}` with coefficients drawn so that
    /// `Σ (k² - 1)(|a_k| + |b_k|) <= margin < 1`, which keeps `h + h''` positive.
    pub fn random_support_fourier<R: rand::Rng + ?Sized>(rng: &mut R, modes: usize, margin: f64) -> Shape {
        let mut cos = vec![1.0, 0.0];
        let mut sin = vec![0.0, 0.0];
        let raw: Vec<(f64, f64)> = (2..=modes.max(2))
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let weight: f64 = raw
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let k = (i + 2) as f64;
                (k * k - 1.0) * (a.abs() + b.abs()) / (k * k)
            })
            .sum();
        for (i, (a, b)) in raw.into_iter().enumerate() {
            let k = (i + 2) as f64;
            // higher modes decay like 1/k²
            let scale = margin / weight.max(1e-300) / (k * k);
            cos.push(a * scale);
            sin.push(b * scale);
        }
        Shape::SupportFourier { cos, sin }
    }

    /// `h, h', h'', h'''` of a support-function shape at `phi`.
    fn support_derivs(cos: &[f64], sin: &[f64], phi: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        let n = cos.len().max(sin.len());
        for k in 0..n {
            let a = cos.get(k).copied().unwrap_or(0.0);
            let b = sin.get(k).copied().unwrap_or(0.0);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let kf = k as f64;
            let (s, c) = (kf * phi).sin_cos();
            let v = a * c + b * s;
            let dv = kf * (-a * s + b * c);
            out[0] += v;
            out[1] += dv;
            out[2] -= kf * kf * v;
            out[3] -= kf * kf * dv;
        }
        out
    }

    fn stadium_length(half_length: f64, radius: f64) -> f64 {
        4.0 * half_length + TAU * radius
    }

    /// Arclength breakpoints `[s1, s2, s3, s4]` between stadium pieces.
    fn stadium_breaks(l: f64, r: f64) -> [f64; 4] {
        let q = FRAC_PI_2 * r;
        [q, q + 2.0 * l, 3.0 * q + 2.0 * l, 3.0 * q + 4.0 * l]
    }

    fn stadium_piece(l: f64, r: f64, s: f64) -> StadiumPiece {
        let [s1, s2, s3, s4] = Self::stadium_breaks(l, r);
        // caps are closed intervals
        if s <= s1 {
            StadiumPiece::RightUpper
        } else if s < s2 {
            StadiumPiece::Top
        } else if s <= s3 {
            StadiumPiece::Left
        } else if s < s4 {
            StadiumPiece::Bottom
        } else {
            StadiumPiece::RightLower
        }
    }

    /// Position, first and second derivatives with respect to the parameter.
    fn jet(&self, t: f64) -> (Vec2, Vec2, Vec2) {
        match self {
            Shape::Circle { radius } => {
                let (s, c) = t.sin_cos();
                (
                    Vec2::new(radius * c, radius * s),
                    Vec2::new(-radius * s, radius * c),
                    Vec2::new(-radius * c, -radius * s),
                )
            }
            Shape::Ellipse { a, b } => {
                let (s, c) = t.sin_cos();
                (Vec2::new(a * c, b * s), Vec2::new(-a * s, b * c), Vec2::new(-a * c, -b * s))
            }
            Shape::Stadium { half_length: l, radius: r } => {
                let (l, r) = (*l, *r);
                let total = Self::stadium_length(l, r);
                let k = total / TAU;
                let s = normalize_angle(t) * k;
                let [s1, s2, s3, s4] = Self::stadium_breaks(l, r);
                let cap = |center: Vec2, theta: f64| {
                    let (sn, cs) = theta.sin_cos();
                    (
                        center + Vec2::new(r * cs, r * sn),
                        Vec2::new(-sn, cs) * k,
                        Vec2::new(-cs, -sn) * (k * k / r),
                    )
                };
                match Self::stadium_piece(l, r, s) {
                    StadiumPiece::RightUpper => cap(Vec2::new(l, 0.0), s / r),
                    StadiumPiece::Top => (Vec2::new(l - (s - s1), r), Vec2::new(-k, 0.0), Vec2::ZERO),
                    StadiumPiece::Left => cap(Vec2::new(-l, 0.0), FRAC_PI_2 + (s - s2) / r),
                    StadiumPiece::Bottom => (Vec2::new(-l + (s - s3), -r), Vec2::new(k, 0.0), Vec2::ZERO),
                    StadiumPiece::RightLower => cap(Vec2::new(l, 0.0), 1.5 * PI + (s - s4) / r),
                }
            }
            Shape::SupportFourier { cos, sin } => {
                let [h, h1, h2, h3] = Self::support_derivs(cos, sin, t);
                let n = Vec2::from_angle(t);
                let np = n.perp();
                let rho = h + h2;
                (n * h + np * h1, np * rho, np * (h1 + h3) - n * rho)
            }
        }
    }

    /// Support value and a support-point parameter for the unit direction at angle `phi`.
    fn support(&self, phi: f64) -> (f64, f64) {
        match self {
            Shape::Circle { radius } => (*radius, normalize_angle(phi)),
            Shape::Ellipse { a, b } => {
                let (s, c) = phi.sin_cos();
                ((a * a * c * c + b * b * s * s).sqrt(), normalize_angle((b * s).atan2(a * c)))
            }
            Shape::Stadium { half_length: l, radius: r } => {
                let (s, c) = phi.sin_cos();
                let h = l * c.abs() + r;
                let center = Vec2::new(if c > 0.0 { *l } else if c < 0.0 { -*l } else { 0.0 }, 0.0);
                let p = center + Vec2::new(c, s) * *r;
                (h, self.stadium_param_of_point(p))
            }
            Shape::SupportFourier { cos, sin } => (Self::support_derivs(cos, sin, phi)[0], normalize_angle(phi)),
        }
    }

    /// Parameter of a point lying on the stadium boundary.
    fn stadium_param_of_point(&self, p: Vec2) -> f64 {
        let Shape::Stadium { half_length: l, radius: r } = self else {
            unreachable!("stadium_param_of_point on non-stadium")
        };
        let (l, r) = (*l, *r);
        let total = Self::stadium_length(l, r);
        let [s1, s2, s3, _] = Self::stadium_breaks(l, r);
        let s = if p.x > l {
            let th = p.y.atan2(p.x - l);
            if th >= 0.0 {
                r * th
            } else {
                total + r * th
            }
        } else if p.x < -l {
            let th = normalize_angle(p.y.atan2(p.x + l));
            s2 + r * (th - FRAC_PI_2)
        } else if p.y > 0.0 {
            s1 + (l - p.x)
        } else {
            s3 + (p.x + l)
        };
        normalize_angle(TAU * s / total)
    }

    /// Parameters `λ` (largest first is not guaranteed) and hit parameters where the line
    /// `o + λ u` meets the stadium boundary.
    fn stadium_line_hits(&self, o: Vec2, u: Vec2) -> Vec<(f64, f64)> {
        let Shape::Stadium { half_length: l, radius: r } = self else {
            unreachable!()
        };
        let (l, r) = (*l, *r);
        let mut hits = Vec::with_capacity(4);
        let slack = 1e-14 * (l + r);
        if u.y != 0.0 {
            for y in [r, -r] {
                let lam = (y - o.y) / u.y;
                let x = o.x + lam * u.x;
                if x.abs() <= l + slack {
                    hits.push((lam, self.stadium_param_of_point(Vec2::new(x.clamp(-l, l), y))));
                }
            }
        }
        for cx in [l, -l] {
            let d = o - Vec2::new(cx, 0.0);
            let a = u.norm_sq();
            let b = 2.0 * d.dot(u);
            let c = d.norm_sq() - r * r;
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            let mut roots = vec![];
            if q != 0.0 {
                roots.push(q / a);
                roots.push(c / q);
            } else {
                roots.push(0.0);
            }
            for lam in roots {
                let p = o + u * lam;
                let on_cap = if cx > 0.0 { p.x >= l - slack } else { p.x <= -l + slack };
                if on_cap {
                    hits.push((lam, self.stadium_param_of_point(p)));
                }
            }
        }
        hits
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ArcLength {
    /// `s = per_param * t`.
    Linear { per_param: f64 },
    /// Cumulative arclength at knots covering `[0, 2π]`.
    Table { knots: Vec<f64>, cum: Vec<f64> },
}

/// A smooth strictly convex closed curve (or a stadium) placed in the plane by an
/// orientation-preserving affine map. Immutable after construction.
///
/// The parameter `t` is `2π`-periodic. For circles and ellipses it is the usual angle, for
/// support-function curves it is the outward normal angle, and for the stadium it is
/// proportional to arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OvalSpec", into = "OvalSpec")]
pub struct Oval {
    shape: Shape,
    transform: Affine2,
    arc: ArcLength,
    total_length: f64,
    diameter: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OvalSpec {
    shape: Shape,
    #[serde(default = "identity")]
    transform: Affine2,
}

fn identity() -> Affine2 {
    Affine2::IDENTITY
}

impl TryFrom<OvalSpec> for Oval {
    type Error = Error;

    fn try_from(spec: OvalSpec) -> Result<Oval> {
        Oval::new(spec.shape, spec.transform)
    }
}

impl From<Oval> for OvalSpec {
    fn from(o: Oval) -> OvalSpec {
        OvalSpec { shape: o.shape, transform: o.transform }
    }
}

impl Oval {
    pub fn circle(radius: f64) -> Result<Oval> {
        Oval::new(Shape::Circle { radius }, Affine2::IDENTITY)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Oval> {
        Oval::new(Shape::Ellipse { a, b }, Affine2::IDENTITY)
    }

    pub fn stadium(half_length: f64, radius: f64) -> Result<Oval> {
        Oval::new(Shape::Stadium { half_length, radius }, Affine2::IDENTITY)
    }

    pub fn support_fourier(cos: Vec<f64>, sin: Vec<f64>) -> Result<Oval> {
        Oval::new(Shape::SupportFourier { cos, sin }, Affine2::IDENTITY)
    }

    pub fn new(shape: Shape, transform: Affine2) -> Result<Oval> {
        validate_shape(&shape)?;
        if !(transform.det() > 0.0) || !transform.det().is_finite() {
            return Err(Error::InvalidCurve(format!(
                "transform must be orientation preserving (det = {})",
                transform.det()
            )));
        }
        let mut oval = Oval {
            shape,
            transform,
            arc: ArcLength::Linear { per_param: 1.0 },
            total_length: 0.0,
            diameter: 0.0,
        };
        oval.arc = oval.build_arclength();
        oval.total_length = match &oval.arc {
            ArcLength::Linear { per_param } => per_param * TAU,
            ArcLength::Table { cum, .. } => *cum.last().unwrap(),
        };
        oval.diameter = (0..256)
            .map(|i| {
                let n = Vec2::from_angle(PI * i as f64 / 256.0);
                oval.support(n) + oval.support(-n)
            })
            .fold(0.0, f64::max);
        oval.validate_geometry()?;
        Ok(oval)
    }

    /// Same shape moved by an additional affine map applied after the current placement.
    pub fn transformed(&self, map: &Affine2) -> Result<Oval> {
        Oval::new(self.shape.clone(), map.compose(&self.transform))
    }

    pub fn translated(&self, by: Vec2) -> Result<Oval> {
        self.transformed(&Affine2::translation(by))
    }

    fn build_arclength(&self) -> ArcLength {
        if let Some(scale) = self.transform.similarity_scale() {
            match &self.shape {
                Shape::Circle { radius } => return ArcLength::Linear { per_param: radius * scale },
                Shape::Stadium { half_length, radius } => {
                    return ArcLength::Linear {
                        per_param: Shape::stadium_length(*half_length, *radius) * scale / TAU,
                    }
                }
                _ => {}
            }
        }
        let mut knots: Vec<f64> = (0..=ARC_PANELS).map(|i| TAU * i as f64 / ARC_PANELS as f64).collect();
        if let Shape::Stadium { half_length, radius } = &self.shape {
            let total = Shape::stadium_length(*half_length, *radius);
            for b in Shape::stadium_breaks(*half_length, *radius) {
                knots.push(TAU * b / total);
            }
            knots.sort_by(f64::total_cmp);
            knots.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        }
        let speed = |t: f64| self.speed(t);
        let mut cum = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in knots.windows(2) {
            acc += gauss_panel(&speed, w[0], w[1]);
            cum.push(acc);
        }
        ArcLength::Table { knots, cum }
    }

    fn validate_geometry(&self) -> Result<()> {
        if !(self.total_length > 0.0) || !self.total_length.is_finite() {
            return Err(Error::InvalidCurve("total length must be positive".into()));
        }
        let closure = self.position(TAU).distance(self.position(0.0));
        if closure > 1e-12 * self.diameter.max(1.0) {
            return Err(Error::InvalidCurve(format!("curve is not closed (gap {closure:.3e})")));
        }
        if !matches!(self.shape, Shape::Stadium { .. }) {
            for i in 0..CONVEXITY_SAMPLES {
                let t = TAU * i as f64 / CONVEXITY_SAMPLES as f64;
                let k = self.curvature(t);
                if !(k > 0.0) {
                    return Err(Error::InvalidCurve(format!(
                        "curvature {k:.3e} at t = {t:.4} is not positive"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn transform(&self) -> &Affine2 {
        &self.transform
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Width maximised over directions.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn position(&self, t: f64) -> Vec2 {
        self.transform.apply(self.shape.jet(t).0)
    }

    /// Derivative of the position with respect to the parameter.
    pub fn velocity(&self, t: f64) -> Vec2 {
        self.transform.linear(self.shape.jet(t).1)
    }

    pub fn acceleration(&self, t: f64) -> Vec2 {
        self.transform.linear(self.shape.jet(t).2)
    }

    pub fn speed(&self, t: f64) -> f64 {
        self.velocity(t).norm()
    }

    pub fn unit_tangent(&self, t: f64) -> Vec2 {
        self.velocity(t).normalized()
    }

    pub fn outward_normal(&self, t: f64) -> Vec2 {
        -self.unit_tangent(t).perp()
    }

    /// Direction angle of the positively oriented tangent, in `[0, 2π)`.
    pub fn tangent_angle(&self, t: f64) -> f64 {
        self.velocity(t).angle()
    }

    /// Signed curvature (positive for a counterclockwise convex curve).
    pub fn curvature(&self, t: f64) -> f64 {
        let (_, v, a) = self.shape.jet(t);
        let (v, a) = (self.transform.linear(v), self.transform.linear(a));
        v.cross(a) / v.norm().powi(3)
    }

    /// Lifted arclength from `t = 0`; `arclength(t + 2π) = arclength(t) + total_length`.
    pub fn arclength(&self, t: f64) -> f64 {
        match &self.arc {
            ArcLength::Linear { per_param } => per_param * t,
            ArcLength::Table { knots, cum } => {
                let turns = (t / TAU).floor();
                let r = t - turns * TAU;
                let i = (knots.partition_point(|&k| k <= r).max(1) - 1).min(knots.len() - 2);
                let speed = |x: f64| self.speed(x);
                turns * self.total_length + cum[i] + gauss_panel(&speed, knots[i], r)
            }
        }
    }

    /// Inverse of [`Oval::arclength`] on the lifted line.
    pub fn param_of_arclength(&self, s: f64) -> f64 {
        match &self.arc {
            ArcLength::Linear { per_param } => s / per_param,
            ArcLength::Table { knots, cum } => {
                let turns = (s / self.total_length).floor();
                let r = s - turns * self.total_length;
                let i = (cum.partition_point(|&c| c <= r).max(1) - 1).min(cum.len() - 2);
                let (t0, t1) = (knots[i], knots[i + 1]);
                let speed = |x: f64| self.speed(x);
                let target = r - cum[i];
                let f = |t: f64| (gauss_panel(&speed, t0, t) - target, self.speed(t));
                let t = safeguarded_newton(f, t0, t1, true, 1e-15).unwrap_or_else(|| {
                    t0 + (t1 - t0) * target / (cum[i + 1] - cum[i])
                });
                turns * TAU + t
            }
        }
    }

    /// Support value `max ⟨x, n⟩` over the curve and the parameter of a support point,
    /// for a unit vector `n`.
    pub fn support_with_param(&self, n: Vec2) -> (f64, f64) {
        let ns = self.transform.linear_t(n);
        let k = ns.norm();
        let (h, t) = self.shape.support(ns.angle());
        (k * h + self.transform.b.dot(n), t)
    }

    pub fn support(&self, n: Vec2) -> f64 {
        self.support_with_param(n).0
    }

    /// `max_φ (⟨p, n(φ)⟩ - h(φ))` in shape coordinates: positive iff `p` is outside.
    fn shape_gap(&self, q: Vec2) -> f64 {
        match &self.shape {
            Shape::Circle { radius } => q.norm() - radius,
            Shape::Ellipse { a, b } => {
                let nq = Vec2::new(q.x / a, q.y / b).norm();
                // sign-correct, scaled distance surrogate
                (nq - 1.0) * a.min(*b)
            }
            Shape::Stadium { half_length, radius } => {
                let cx = q.x.clamp(-half_length, *half_length);
                Vec2::new(q.x - cx, q.y).norm() - radius
            }
            Shape::SupportFourier { .. } => {
                let f = |phi: f64| q.dot(Vec2::from_angle(phi)) - self.shape.support(phi).0;
                let (best, _) = (0..BRACKET_CELLS)
                    .map(|i| TAU * i as f64 / BRACKET_CELLS as f64)
                    .map(|phi| (phi, f(phi)))
                    .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
                let h = TAU / BRACKET_CELLS as f64;
                golden_max(f, best - h, best + h, 1e-13).1
            }
        }
    }

    /// True when `p` lies strictly inside the curve.
    pub fn contains(&self, p: Vec2) -> bool {
        self.shape_gap(self.transform.inverse_apply(p)) < 0.0
    }

    /// Parameter of the second boundary intersection of the ray leaving `position(t_from)`
    /// in direction `direction`, lifted into `(t_from, t_from + 2π)`.
    pub fn second_intersection(&self, t_from: f64, direction: f64) -> Result<f64> {
        let u = Vec2::from_angle(direction);
        let sine = self.unit_tangent(t_from).cross(u);
        if sine < GRAZING_SINE {
            return Err(Error::TangentialRay { sine });
        }
        let us = self.transform.inverse_linear(u);
        let (ps, _, _) = self.shape.jet(t_from);
        let hit = match &self.shape {
            Shape::Circle { .. } | Shape::Ellipse { .. } => {
                let (a, b) = self.semi_axes();
                let q = Vec2::new(ps.x / a, ps.y / b);
                let w = Vec2::new(us.x / a, us.y / b);
                let lam = -2.0 * q.dot(w) / w.norm_sq();
                let h = q + w * lam;
                h.y.atan2(h.x)
            }
            Shape::Stadium { .. } => {
                let hits = self.shape.stadium_line_hits(ps, us);
                let best = hits
                    .into_iter()
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .ok_or(Error::NoConvergence { operation: "second_intersection" })?;
                if !(best.0 > 0.0) {
                    return Err(Error::TangentialRay { sine });
                }
                best.1
            }
            Shape::SupportFourier { .. } => self.scan_second_intersection(t_from, ps, us)?,
        };
        Ok(lift_after(hit, t_from))
    }

    fn semi_axes(&self) -> (f64, f64) {
        match self.shape {
            Shape::Circle { radius } => (radius, radius),
            Shape::Ellipse { a, b } => (a, b),
            _ => unreachable!(),
        }
    }

    /// Sign-change scan for the second root of `cross(u, γ(t) - γ(t0))`, which is negative
    /// just after `t0` for an entering ray and positive after the hit.
    fn scan_second_intersection(&self, t0: f64, p0: Vec2, u: Vec2) -> Result<f64> {
        let g = |t: f64| {
            let (p, v, _) = self.shape.jet(t);
            (u.cross(p - p0), u.cross(v))
        };
        let h = TAU / BRACKET_CELLS as f64;
        let solve = |lo: f64, hi: f64| {
            safeguarded_newton(g, lo, hi, true, 1e-15).ok_or(Error::NoConvergence { operation: "second_intersection" })
        };
        if let Some(k) = (1..BRACKET_CELLS).find(|&k| g(t0 + h * k as f64).0 > 0.0) {
            return solve(t0 + h * (k - 1) as f64, t0 + h * k as f64);
        }
        // g < 0 up to the last sample, so the hit sits in the final cell, next to t0 + 2π where
        // g is positive from the left; approach that end geometrically
        let end = t0 + TAU;
        let mut lo = end - h;
        let mut gap = h;
        for _ in 0..80 {
            gap *= 0.5;
            let x = end - gap;
            if g(x).0 > 0.0 {
                return solve(lo, x);
            }
            lo = x;
        }
        Err(Error::NoConvergence { operation: "second_intersection" })
    }

    /// Parameter (in `[0, 2π)`) where the ray from `origin` (inside or on the curve) along
    /// `dir` leaves the domain.
    pub fn ray_exit(&self, origin: Vec2, dir: Vec2) -> Result<f64> {
        let o = self.transform.inverse_apply(origin);
        let u = self.transform.inverse_linear(dir);
        let t = match &self.shape {
            Shape::Circle { .. } | Shape::Ellipse { .. } => {
                let (a, b) = self.semi_axes();
                let q = Vec2::new(o.x / a, o.y / b);
                let w = Vec2::new(u.x / a, u.y / b);
                let aa = w.norm_sq();
                let bb = 2.0 * q.dot(w);
                let cc = q.norm_sq() - 1.0;
                let disc = bb * bb - 4.0 * aa * cc;
                if disc < 0.0 {
                    return Err(Error::InvalidArgument("ray origin lies outside the curve".into()));
                }
                let sq = disc.sqrt();
                let lam = if bb <= 0.0 { (-bb + sq) / (2.0 * aa) } else { 2.0 * cc / (-bb - sq) };
                let h = q + w * lam;
                h.y.atan2(h.x)
            }
            Shape::Stadium { .. } => {
                let hits = self.shape.stadium_line_hits(o, u);
                hits.into_iter()
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .ok_or(Error::NoConvergence { operation: "ray_exit" })?
                    .1
            }
            Shape::SupportFourier { .. } => self.scan_ray_exit(o, u)?,
        };
        Ok(normalize_angle(t))
    }

    fn scan_ray_exit(&self, o: Vec2, u: Vec2) -> Result<f64> {
        let g = |t: f64| {
            let (p, v, _) = self.shape.jet(t);
            (u.cross(p - o), u.cross(v))
        };
        let mut cells = BRACKET_CELLS;
        while cells <= 1 << 16 {
            let h = TAU / cells as f64;
            let vals: Vec<f64> = (0..=cells).map(|k| g(h * k as f64).0).collect();
            let mut best: Option<(f64, f64)> = None;
            for k in 0..cells {
                let (a, b) = (vals[k], vals[k + 1]);
                if a == 0.0 || a * b < 0.0 {
                    let root = if a == 0.0 {
                        h * k as f64
                    } else {
                        safeguarded_newton(g, h * k as f64, h * (k + 1) as f64, a < 0.0, 1e-15)
                            .ok_or(Error::NoConvergence { operation: "ray_exit" })?
                    };
                    let proj = (self.shape.jet(root).0 - o).dot(u);
                    if best.is_none_or(|(_, p)| proj > p) {
                        best = Some((root, proj));
                    }
                }
            }
            if let Some((root, proj)) = best {
                if proj > 0.0 {
                    return Ok(root);
                }
            }
            cells *= 2;
        }
        Err(Error::NoConvergence { operation: "ray_exit" })
    }

    /// Parameters where the two lines through the exterior point `a` touch the curve.
    ///
    /// The first entry is the forward tangency: moving from `a` to the tangency point, the
    /// curve lies on the left (counterclockwise outer-billiard motion).
    pub fn tangent_points_from_external(&self, a: Vec2) -> Result<(f64, f64)> {
        let q = self.transform.inverse_apply(a);
        let inside = || Error::PointInside { x: a.x, y: a.y };
        match &self.shape {
            Shape::Circle { .. } | Shape::Ellipse { .. } => {
                let (sa, sb) = self.semi_axes();
                let w = Vec2::new(q.x / sa, q.y / sb);
                let r = w.norm();
                if r <= 1.0 + 1e-15 {
                    return Err(inside());
                }
                let beta = w.y.atan2(w.x);
                let delta = (1.0 / r).acos();
                Ok((normalize_angle(beta + delta), normalize_angle(beta - delta)))
            }
            Shape::Stadium { .. } | Shape::SupportFourier { .. } => {
                let f = |phi: f64| q.dot(Vec2::from_angle(phi)) - self.shape.support(phi).0;
                let df = |phi: f64| -> f64 {
                    match &self.shape {
                        Shape::SupportFourier { cos, sin } => {
                            q.dot(Vec2::from_angle(phi).perp()) - Shape::support_derivs(cos, sin, phi)[1]
                        }
                        _ => f64::NAN,
                    }
                };
                let h = TAU / BRACKET_CELLS as f64;
                let (best, _) = (0..BRACKET_CELLS)
                    .map(|i| h * i as f64)
                    .map(|phi| (phi, f(phi)))
                    .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
                let (phi_max, f_max) = golden_max(f, best - h, best + h, 1e-14);
                if f_max <= 1e-14 * self.diameter {
                    return Err(inside());
                }
                // f > 0 on the visible arc around phi_max; step outwards until it turns negative
                let find = |dir: f64| -> Result<f64> {
                    let mut prev = phi_max;
                    for k in 1..=BRACKET_CELLS {
                        let x = phi_max + dir * h * k as f64;
                        if f(x) < 0.0 {
                            let (lo, hi) = if dir > 0.0 { (prev, x) } else { (x, prev) };
                            // f is positive at the end nearer phi_max
                            let lo_negative = dir < 0.0;
                            return safeguarded_newton(|p| (f(p), df(p)), lo, hi, lo_negative, 1e-15)
                                .ok_or(Error::NoConvergence { operation: "tangent_points_from_external" });
                        }
                        prev = x;
                    }
                    Err(Error::NoConvergence { operation: "tangent_points_from_external" })
                };
                let phi_f = find(1.0)?;
                let phi_b = find(-1.0)?;
                let t_of = |phi: f64| self.shape.support(phi).1;
                Ok((t_of(phi_f), t_of(phi_b)))
            }
        }
    }
}

/// Lift a parameter into `(from, from + 2π]`.
pub(crate) fn lift_after(t: f64, from: f64) -> f64 {
    let mut x = from + normalize_angle(t - from);
    if x <= from {
        x += TAU;
    }
    x
}

fn validate_shape(shape: &Shape) -> Result<()> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidCurve(format!("{name} must be positive and finite, got {v}")))
        }
    };
    match shape {
        Shape::Circle { radius } => positive("radius", *radius),
        Shape::Ellipse { a, b } => {
            positive("a", *a)?;
            positive("b", *b)
        }
        Shape::Stadium { half_length, radius } => {
            positive("radius", *radius)?;
            if !(*half_length >= 0.0) || !half_length.is_finite() {
                return Err(Error::InvalidCurve(format!("half_length must be non-negative, got {half_length}")));
            }
            Ok(())
        }
        Shape::SupportFourier { cos, sin } => {
            let a0 = cos.first().copied().unwrap_or(0.0);
            positive("cos[0]", a0)?;
            if sin.first().is_some_and(|&s| s != 0.0) {
                return Err(Error::InvalidCurve("sin[0] must be zero".into()));
            }
            if cos.iter().chain(sin.iter()).any(|c| !c.is_finite()) {
                return Err(Error::InvalidCurve("coefficients must be finite".into()));
            }
            for i in 0..CONVEXITY_SAMPLES {
                let phi = TAU * i as f64 / CONVEXITY_SAMPLES as f64;
                let d = Shape::support_derivs(cos, sin, phi);
                let rho = d[0] + d[2];
                if !(rho > 0.0) {
                    return Err(Error::InvalidCurve(format!(
                        "radius of curvature h + h'' = {rho:.3e} at φ = {phi:.4} is not positive"
                    )));
                }
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn positions_of_simple_shapes() {
        let c = Oval::circle(1.0).unwrap();
        assert!(c.position(0.0).distance(Vec2::new(1.0, 0.0)) < 1e-15);
        let e = Oval::ellipse(2.0, 1.0).unwrap();
        assert!(e.position(FRAC_PI_2).distance(Vec2::new(0.0, 1.0)) < 1e-15);
        let s = Oval::support_fourier(vec![1.0], vec![]).unwrap();
        assert!(s.position(PI).distance(Vec2::new(-1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn tangent_angles() {
        let c = Oval::circle(1.0).unwrap();
        assert!(close(c.tangent_angle(0.0), FRAC_PI_2, 1e-15));
        let e = Oval::ellipse(2.0, 1.0).unwrap();
        assert!(close(e.tangent_angle(0.0), FRAC_PI_2, 1e-15));
        let st = Oval::stadium(1.0, 1.0).unwrap();
        // top segment runs from s = π/2 to π/2 + 2; take its midpoint
        let t = st.param_of_arclength(FRAC_PI_2 + 1.0);
        assert!(st.position(t).distance(Vec2::new(0.0, 1.0)) < 1e-12);
        assert!(close(st.tangent_angle(t), PI, 1e-15));
        assert_eq!(st.curvature(t), 0.0);
    }

    #[test]
    fn stadium_junction_uses_cap_curvature() {
        let st = Oval::stadium(1.0, 0.5).unwrap();
        let t = st.param_of_arclength(FRAC_PI_2 * 0.5);
        assert!(close(st.curvature(t), 2.0, 1e-9));
        // tangent is continuous across the junction
        let a = st.tangent_angle(t - 1e-9);
        let b = st.tangent_angle(t + 1e-9);
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn rejects_invalid_curves() {
        assert!(Oval::circle(-1.0).is_err());
        assert!(Oval::ellipse(1.0, 0.0).is_err());
        // h = 1 + 0.5 cos 3φ has h + h'' = 1 - 4 cos 3φ < 0 somewhere
        assert!(Oval::support_fourier(vec![1.0, 0.0, 0.0, 0.5], vec![]).is_err());
        let flip = Affine2::new([[1.0, 0.0], [0.0, -1.0]], Vec2::ZERO);
        assert!(Oval::new(Shape::Circle { radius: 1.0 }, flip).is_err());
    }

    #[test]
    fn circle_arclength_is_linear() {
        let c = Oval::circle(1.0).unwrap();
        assert!(close(c.arclength(1.3), 1.3, 1e-15));
        let c2 = Oval::circle(2.0).unwrap();
        assert!(close(c2.arclength(PI), TAU, 1e-14));
    }

    #[test]
    fn second_intersection_circle_examples() {
        let c = Oval::circle(1.0).unwrap();
        assert!(close(c.second_intersection(0.0, PI).unwrap(), PI, 1e-14));
        // chord at incidence π/3 from the tangent subtends 2π/3
        let t = c.second_intersection(0.0, FRAC_PI_2 + PI / 3.0).unwrap();
        assert!(close(t, 2.0 * PI / 3.0, 1e-14));
    }

    #[test]
    fn grazing_ray_is_rejected() {
        let c = Oval::circle(1.0).unwrap();
        assert!(matches!(c.second_intersection(0.0, FRAC_PI_2), Err(Error::TangentialRay { .. })));
        assert!(matches!(c.second_intersection(0.0, 0.0), Err(Error::TangentialRay { .. })));
    }

    #[test]
    fn tangent_points_circle() {
        let c = Oval::circle(1.0).unwrap();
        let (f, b) = c.tangent_points_from_external(Vec2::new(2.0, 0.0)).unwrap();
        assert!(close(f, PI / 3.0, 1e-14));
        assert!(close(b, TAU - PI / 3.0, 1e-14));
        let (f, b) = c.tangent_points_from_external(Vec2::new(2f64.sqrt(), 2f64.sqrt())).unwrap();
        assert!(close(0.5 * (f + b - TAU), PI / 4.0, 1e-14) || close(0.5 * (f + b), PI / 4.0, 1e-14));
        assert!(matches!(
            c.tangent_points_from_external(Vec2::new(0.5, 0.0)),
            Err(Error::PointInside { .. })
        ));
        assert!(c.tangent_points_from_external(Vec2::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn support_fourier_tangent_points_match_circle() {
        let s = Oval::support_fourier(vec![1.0], vec![]).unwrap();
        let (f, b) = s.tangent_points_from_external(Vec2::new(2.0, 0.0)).unwrap();
        assert!(close(f, PI / 3.0, 1e-12), "{f}");
        assert!(close(b, TAU - PI / 3.0, 1e-12), "{b}");
    }

    #[test]
    fn ray_exit_from_interior() {
        let c = Oval::circle(1.0).unwrap();
        let t = c.ray_exit(Vec2::new(0.4, 0.0), Vec2::new(0.0, 1.0)).unwrap();
        assert!(c.position(t).distance(Vec2::new(0.4, (1.0f64 - 0.16).sqrt())) < 1e-14);
        let s = Oval::support_fourier(vec![1.0], vec![]).unwrap();
        let t2 = s.ray_exit(Vec2::new(0.4, 0.0), Vec2::new(0.0, 1.0)).unwrap();
        assert!(close(t, t2, 1e-12));
    }

    #[test]
    fn contains_points() {
        let st = Oval::stadium(1.0, 1.0).unwrap();
        assert!(st.contains(Vec2::new(1.5, 0.5)));
        assert!(!st.contains(Vec2::new(1.9, 0.9)));
        let s = Oval::support_fourier(vec![1.0, 0.0, 0.05], vec![]).unwrap();
        assert!(s.contains(Vec2::new(0.5, 0.5)));
        assert!(!s.contains(Vec2::new(1.5, 0.0)));
    }

    #[test]
    fn translation_moves_positions_only() {
        let e = Oval::ellipse(2.0, 1.0).unwrap();
        let moved = e.translated(Vec2::new(1.0, -2.0)).unwrap();
        assert!(moved.position(0.3).distance(e.position(0.3) + Vec2::new(1.0, -2.0)) < 1e-15);
        assert!(close(moved.total_length(), e.total_length(), 1e-12));
    }
}
