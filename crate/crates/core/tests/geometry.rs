use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use billiard_core::geometry::{OrientedLine, Oval, PolygonTable, Shape};
use billiard_core::{Affine2, Error, Vec2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// mpmath, 40 digits: quad of |γ'(t)| for a = 2, b = 1
const ELLIPSE_PERIMETER: f64 = 9.688448220547676;
// atan2(4/3): the chord from (2, 0) along 3π/4
const ELLIPSE_CHORD_T: f64 = 0.9272952180016122;
// tangency from (3, 0): t = acos(2/3), normal angle atan2(sin t / 1, cos t / 2)
const ELLIPSE_TANGENT_T: f64 = 0.8410686705679303;
const ELLIPSE_TANGENT_PHI: f64 = 1.1502619915109315;

fn ellipse() -> Oval {
    Oval::ellipse(2.0, 1.0).unwrap()
}

fn random_oval(seed: u64) -> Oval {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = Shape::random_support_fourier(&mut rng, 5, 0.6);
    Oval::new(shape, Affine2::IDENTITY).unwrap()
}

/// Ray-parameter bisection on an implicit form `F(x) = 0`, positive outside.
fn bisect_ray(f: impl Fn(Vec2) -> f64, o: Vec2, d: Vec2, far: f64) -> Vec2 {
    let (mut lo, mut hi) = (far * 1e-6, far);
    assert!(f(o + d * lo) < 0.0 && f(o + d * hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(o + d * mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    o + d * (0.5 * (lo + hi))
}

#[test]
fn position_examples() {
    let c = Oval::circle(1.0).unwrap();
    assert!((c.position(0.0) - Vec2::new(1.0, 0.0)).norm() < 1e-15);
    assert!((ellipse().position(FRAC_PI_2) - Vec2::new(0.0, 1.0)).norm() < 1e-15);
    let h = Oval::support_fourier(vec![1.0], vec![0.0]).unwrap();
    assert!((h.position(PI) - Vec2::new(-1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn tangent_angle_examples() {
    assert!((Oval::circle(1.0).unwrap().tangent_angle(0.0) - FRAC_PI_2).abs() < 1e-15);
    assert!((ellipse().tangent_angle(0.0) - FRAC_PI_2).abs() < 1e-15);
    let st = Oval::stadium(1.0, 1.0).unwrap();
    // top segment is traversed leftward
    let t = (0..64).map(|i| TAU * i as f64 / 64.0).find(|&t| {
        let p = st.position(t);
        p.x.abs() < 0.5 && p.y > 0.0
    });
    assert!((st.tangent_angle(t.unwrap()) - PI).abs() < 1e-12);
}

#[test]
fn ellipse_perimeter_matches_quadrature_oracle() {
    assert!((ellipse().total_length() - ELLIPSE_PERIMETER).abs() < 1e-9);
}

#[test]
fn arclength_examples() {
    let c = Oval::circle(1.0).unwrap();
    assert!((c.arclength(1.3) - 1.3).abs() < 1e-15);
    assert!((Oval::circle(2.0).unwrap().arclength(PI) - TAU).abs() < 1e-14);
}

#[test]
fn second_intersection_examples() {
    let c = Oval::circle(1.0).unwrap();
    assert!((c.second_intersection(0.0, PI).unwrap() - PI).abs() < 1e-14);
    let t = c.second_intersection(0.0, FRAC_PI_2 + PI / 3.0).unwrap();
    assert!((t - 2.0 * PI / 3.0).abs() < 1e-14);
    let e = ellipse();
    let t = e.second_intersection(0.0, 3.0 * FRAC_PI_4).unwrap();
    assert!((t - ELLIPSE_CHORD_T).abs() < 1e-10);
    let implicit = |p: Vec2| p.x * p.x / 4.0 + p.y * p.y - 1.0;
    let hit = bisect_ray(implicit, e.position(0.0), Vec2::from_angle(3.0 * FRAC_PI_4), 10.0);
    assert!((e.position(t) - hit).norm() < 1e-10);
}

#[test]
fn grazing_ray_is_rejected() {
    let c = Oval::circle(1.0).unwrap();
    assert!(matches!(c.second_intersection(0.0, FRAC_PI_2), Err(Error::TangentialRay { .. })));
    assert!(matches!(c.second_intersection(0.0, FRAC_PI_2 + 1e-12), Err(Error::TangentialRay { .. })));
}

#[test]
fn tangent_points_examples() {
    let c = Oval::circle(1.0).unwrap();
    let (f, b) = c.tangent_points_from_external(Vec2::new(2.0, 0.0)).unwrap();
    let pts = [c.position(f), c.position(b)];
    for p in pts {
        assert!((p.x - 0.5).abs() < 1e-14 && (p.y.abs() - 3f64.sqrt() / 2.0).abs() < 1e-14);
    }
    let a = Vec2::new(2f64.sqrt(), 2f64.sqrt());
    let (f, b) = c.tangent_points_from_external(a).unwrap();
    let mid = 0.5 * (billiard_core::vec2::wrap_to_pi(f - FRAC_PI_4) + billiard_core::vec2::wrap_to_pi(b - FRAC_PI_4));
    assert!(mid.abs() < 1e-14);
    let line = OrientedLine::through(c.position(f), c.position(b) - c.position(f));
    assert!((line.signed_distance(Vec2::ZERO).abs() - 0.5).abs() < 1e-14);

    let e = ellipse();
    let (f, b) = e.tangent_points_from_external(Vec2::new(3.0, 0.0)).unwrap();
    let ts = [billiard_core::vec2::wrap_to_pi(f), billiard_core::vec2::wrap_to_pi(b)];
    assert!(ts.iter().any(|t| (t - ELLIPSE_TANGENT_T).abs() < 1e-10));
    assert!(ts.iter().any(|t| (t + ELLIPSE_TANGENT_T).abs() < 1e-10));
    // the dual description: h(φ) = <A, n(φ)> at the tangency normal
    let n = Vec2::from_angle(ELLIPSE_TANGENT_PHI);
    assert!((e.support(n) - Vec2::new(3.0, 0.0).dot(n)).abs() < 1e-12);
    assert!(matches!(e.tangent_points_from_external(Vec2::new(0.5, 0.0)), Err(Error::PointInside { .. })));
}

#[test]
fn dual_bisection_oracle_for_random_oval() {
    // tangency normals are roots of h(φ) - <A, n(φ)>, found on a grid independently of the solver
    let o = random_oval(7);
    let a = Vec2::new(2.5, 0.7);
    let g = |phi: f64| o.support(Vec2::from_angle(phi)) - a.dot(Vec2::from_angle(phi));
    let m = 4096;
    let mut roots = Vec::new();
    for i in 0..m {
        let (mut lo, mut hi) = (TAU * i as f64 / m as f64, TAU * (i + 1) as f64 / m as f64);
        if g(lo) * g(hi) < 0.0 {
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if g(lo) * g(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    assert_eq!(roots.len(), 2);
    let (f, b) = o.tangent_points_from_external(a).unwrap();
    for t in [f, b] {
        let phi = o.outward_normal(t).angle();
        assert!(roots.iter().any(|r| billiard_core::vec2::wrap_to_pi(r - phi).abs() < 1e-9), "{phi} vs {roots:?}");
    }
}

#[test]
fn invalid_curves_are_rejected() {
    assert!(Oval::circle(-1.0).is_err());
    assert!(Oval::ellipse(1.0, 0.0).is_err());
    // h = 1 + 0.5 cos 2φ has h + h'' < 0 somewhere
    assert!(Oval::support_fourier(vec![1.0, 0.0, 0.5], vec![0.0, 0.0, 0.0]).is_err());
    assert!(PolygonTable::from_points(&[[0.0, 0.0], [1.0, 0.0]]).is_err());
    assert!(PolygonTable::from_points(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
}

#[test]
fn support_curvature_radius_matches_finite_differences() {
    let o = random_oval(11);
    let Shape::SupportFourier { .. } = o.shape() else { unreachable!() };
    let h = |phi: f64| o.shape().support_derivatives(phi).unwrap()[0];
    for i in 0..200 {
        let phi = TAU * i as f64 / 200.0;
        let d = o.shape().support_derivatives(phi).unwrap();
        let rho = d[0] + d[2];
        assert!(rho > 0.0);
        let e = 1e-4;
        let fd = (h(phi + e) - 2.0 * h(phi) + h(phi - e)) / (e * e);
        assert!((fd - d[2]).abs() < 1e-6, "{fd} vs {}", d[2]);
        // curvature of the parametrised curve is 1/ρ
        assert!((o.curvature(phi) - 1.0 / rho).abs() < 1e-9 * (1.0 / rho));
    }
}

fn ovals() -> Vec<Oval> {
    vec![
        Oval::circle(1.3).unwrap(),
        ellipse(),
        Oval::stadium(1.0, 1.0).unwrap(),
        random_oval(3),
        ellipse().transformed(&Affine2::new([[1.0, 0.4], [0.1, 0.9]], Vec2::new(0.3, -0.2))).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curves_are_closed(k in 0usize..5, t in -20.0f64..20.0) {
        let o = &ovals()[k];
        let d = (o.position(t + TAU) - o.position(t)).norm();
        prop_assert!(d <= 1e-12 * o.diameter());
    }

    #[test]
    fn second_intersection_is_an_involution(k in 0usize..5, t in 0.0f64..TAU, alpha in 0.05f64..(PI - 0.05)) {
        let o = &ovals()[k];
        let dir = o.tangent_angle(t) + alpha;
        let t1 = o.second_intersection(t, dir).unwrap();
        let back = o.second_intersection(t1, dir + PI).unwrap();
        let err = billiard_core::vec2::wrap_to_pi(back - t).abs();
        prop_assert!(err < 1e-9, "err {}", err);
        // the hit is on the ray
        let u = Vec2::from_angle(dir);
        prop_assert!(u.cross(o.position(t1) - o.position(t)).abs() < 1e-10 * o.total_length());
    }

    #[test]
    fn arclength_round_trip(k in 0usize..5, s in 0.0f64..1.0) {
        let o = &ovals()[k];
        let s = s * o.total_length();
        let t = o.param_of_arclength(s);
        prop_assert!((o.arclength(t) - s).abs() < 1e-10 * o.total_length());
    }

    #[test]
    fn tangent_lines_pass_through_the_external_point(k in 0usize..5, r in 1.2f64..4.0, theta in 0.0f64..TAU) {
        let o = &ovals()[k];
        let a = Vec2::from_angle(theta) * (r * o.diameter());
        let (f, b) = o.tangent_points_from_external(a).unwrap();
        for t in [f, b] {
            let p = o.position(t);
            let u = o.unit_tangent(t);
            prop_assert!(u.cross(a - p).abs() < 1e-10 * o.diameter());
            // second-order contact: the curve stays on one side near p
            let line = OrientedLine::through(p, u);
            let (l, rr) = (line.signed_distance(o.position(t - 1e-3)), line.signed_distance(o.position(t + 1e-3)));
            prop_assert!(l * rr >= -1e-24);
        }
    }

    #[test]
    fn oriented_line_normalisation(phi in -20.0f64..20.0, p in -5.0f64..5.0) {
        let l = OrientedLine::new(phi, p);
        prop_assert!((0.0..TAU).contains(&l.phi));
        let r = l.reversed();
        prop_assert!(r != l);
        prop_assert!((r.signed_distance(Vec2::new(0.3, 0.2)) + l.signed_distance(Vec2::new(0.3, 0.2))).abs() < 1e-12);
    }
}
