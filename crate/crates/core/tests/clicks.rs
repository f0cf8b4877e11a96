use std::f64::consts::FRAC_PI_2;

use billiard_core::clicks::*;
use billiard_core::geometry::{Oval, Shape};
use billiard_core::{Affine2, Vec2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_oval(seed: u64) -> Oval {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Oval::new(Shape::random_support_fourier(&mut rng, 5, 0.3), Affine2::translation(Vec2::new(0.013, -0.021))).unwrap()
}

fn lambdas(clicks: &[ClickEvent]) -> Vec<(f64, usize)> {
    clicks.iter().map(|c| (c.lambda, c.multiplicity)).collect()
}

fn assert_same(a: &[(f64, usize)], b: &[(f64, usize)], tol: f64) {
    assert_eq!(a.len(), b.len(), "{a:?}\n{b:?}");
    for (x, y) in a.iter().zip(b) {
        assert!((x.0 - y.0).abs() <= tol && x.1 == y.1, "{x:?} vs {y:?}");
    }
}

/// Clicks in `[a, b)` relative to `a`.
fn relative(train: &ClickTrain, a: f64, b: f64) -> Vec<(f64, usize)> {
    train.clicks_in(a, b).iter().map(|c| (c.lambda - a, c.multiplicity)).collect()
}

#[test]
fn random_curve_clicks_repeat_with_period_epsilon() {
    let eps = 0.01;
    let curve = ClickCurve::Oval(random_oval(12));
    let train = click_events(&curve, eps, Vec2::new(1.0, 0.0), [0.0, 2.0 * eps]).unwrap();
    let first = relative(&train, 0.0, eps);
    assert!(!first.is_empty());
    assert_same(&first, &relative(&train, eps, 2.0 * eps), 1e-10);
}

#[test]
fn polygon_clicks_repeat_with_period_epsilon() {
    let eps = 0.05;
    let curve = ClickCurve::Polyline { points: vec![[0.0, 0.0], [0.93, 0.11], [0.71, 0.88], [0.05, 0.61]], closed: true };
    let train = click_events(&curve, eps, Vec2::new(0.0, 1.0), [0.0, 2.0 * eps]).unwrap();
    assert_same(&relative(&train, 0.0, eps), &relative(&train, eps, 2.0 * eps), 1e-10);
}

#[test]
fn translating_the_curve_along_v_shifts_the_clicks() {
    let eps = 0.02;
    let v = Vec2::new(1.0, 0.0);
    let delta = 0.0137;
    let base = random_oval(4);
    let moved = base.translated(v * delta).unwrap();
    let a = click_events(&ClickCurve::Oval(base), eps, v, [0.0, eps]).unwrap();
    let b = click_events(&ClickCurve::Oval(moved), eps, v, [-delta, eps - delta]).unwrap();
    let shifted: Vec<(f64, usize)> = b.clicks.iter().map(|c| (c.lambda + delta, c.multiplicity)).collect();
    assert_same(&lambdas(&a.clicks), &shifted, 1e-12);
}

#[test]
fn quarter_turn_about_a_lattice_point_preserves_the_clicks() {
    let eps = 0.05;
    let base = random_oval(7);
    let turned = base.transformed(&Affine2::rotation(FRAC_PI_2)).unwrap();
    let a = click_events(&ClickCurve::Oval(base), eps, Vec2::new(1.0, 0.0), [0.0, eps]).unwrap();
    let b = click_events(&ClickCurve::Oval(turned), eps, Vec2::new(0.0, 1.0), [0.0, eps]).unwrap();
    assert_same(&lambdas(&a.clicks), &lambdas(&b.clicks), 1e-12);
}

#[test]
fn square_symmetric_curve_is_invariant_under_a_quarter_turn() {
    let eps = 0.1;
    let square = ClickCurve::Polyline { points: vec![[0.37, 0.0], [0.0, 0.37], [-0.37, 0.0], [0.0, -0.37]], closed: true };
    let turned = ClickCurve::Polyline { points: vec![[0.0, 0.37], [-0.37, 0.0], [0.0, -0.37], [0.37, 0.0]], closed: true };
    let v = Vec2::new(1.0, 0.0);
    let a = click_events(&square, eps, v, [0.0, eps]).unwrap();
    let b = click_events(&turned, eps, v, [0.0, eps]).unwrap();
    assert_same(&lambdas(&a.clicks), &lambdas(&b.clicks), 1e-12);
}

#[test]
fn histogram_counts_every_click() {
    let eps = 0.01;
    let train = click_events(&ClickCurve::Oval(Oval::circle(1.0).unwrap()), eps, Vec2::new(1.0, 0.0), [0.0, 3.0 * eps]).unwrap();
    let h = click_histogram(&train, 64).unwrap();
    assert_eq!(h.counts.iter().sum::<usize>(), train.total_clicks());
    assert!(click_histogram(&train, 8).is_err());
}

#[test]
fn convex_curves_click_at_most_twice_per_lattice_point() {
    let eps = 0.1;
    let oval = random_oval(21);
    let train = click_events(&ClickCurve::Oval(oval.clone()), eps, Vec2::new(1.0, 0.0), [0.0, eps]).unwrap();
    // every lattice row crossing the curve contributes two clicks per period
    let (lo, hi) = (-oval.support(Vec2::new(0.0, -1.0)), oval.support(Vec2::new(0.0, 1.0)));
    let rows = ((hi / eps).floor() - (lo / eps).ceil() + 1.0) as usize;
    assert!(train.total_clicks() <= 2 * rows);
    assert!(train.total_clicks() >= 2 * rows - 2);
}

#[test]
fn clicks_round_trip_through_json() {
    let train = click_events(&ClickCurve::Oval(random_oval(2)), 0.1, Vec2::new(0.0, 1.0), [0.0, 0.1]).unwrap();
    let text = serde_json::to_string(&train).unwrap();
    let back: ClickTrain = serde_json::from_str(&text).unwrap();
    assert_eq!(back, train);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn period_property_on_random_curves(seed in 0u64..1000, a in -0.3f64..0.3, vertical in any::<bool>()) {
        let eps = 0.03;
        let v = if vertical { Vec2::new(0.0, 1.0) } else { Vec2::new(1.0, 0.0) };
        let train = click_events(&ClickCurve::Oval(random_oval(seed)), eps, v, [a, a + 2.0 * eps]).unwrap();
        let first = relative(&train, a, a + eps);
        let second = relative(&train, a + eps, a + 2.0 * eps);
        prop_assert_eq!(first.len(), second.len());
        for (x, y) in first.iter().zip(&second) {
            prop_assert!((x.0 - y.0).abs() < 1e-10 && x.1 == y.1);
        }
    }

    #[test]
    fn translation_equivariance(seed in 0u64..1000, delta in -0.05f64..0.05) {
        let eps = 0.04;
        let v = Vec2::new(0.0, 1.0);
        let base = random_oval(seed);
        let moved = base.translated(v * delta).unwrap();
        let a = click_events(&ClickCurve::Oval(base), eps, v, [0.0, eps]).unwrap();
        let b = click_events(&ClickCurve::Oval(moved), eps, v, [-delta, eps - delta]).unwrap();
        prop_assert_eq!(a.clicks.len(), b.clicks.len());
        for (x, y) in a.clicks.iter().zip(&b.clicks) {
            prop_assert!((x.lambda - (y.lambda + delta)).abs() < 1e-12);
        }
    }

    #[test]
    fn histogram_total_matches_train(seed in 0u64..1000, bins in 16usize..128) {
        let train = click_events(&ClickCurve::Oval(random_oval(seed)), 0.05, Vec2::new(1.0, 0.0), [0.0, 0.1]).unwrap();
        let h = click_histogram(&train, bins).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<usize>(), train.total_clicks());
    }
}
