//! Scalar root finding and maximisation used by the curve solvers.

/// Refine a root inside a bracket `[lo, hi]` by Newton steps that fall back to bisection
/// whenever the step leaves the bracket or stalls.
///
/// `f` returns the value and derivative at a point; a non-finite derivative forces bisection.
/// The sign of `f` at `lo` is given by `lo_negative` rather than evaluated, so an endpoint
/// that is itself a root of no interest (the start point of a chord) can be used as a bracket
/// end. Returns `None` only when the iteration budget runs out.
pub fn safeguarded_newton<F>(mut f: F, lo: f64, hi: f64, lo_negative: bool, tol: f64) -> Option<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    // orient so that "negative side" is always `a`
    let (mut a, mut b) = (lo, hi);
    let sign = if lo_negative { 1.0 } else { -1.0 };
    let mut x = 0.5 * (a + b);
    let mut dx_old = (b - a).abs();
    let mut dx = dx_old;
    let (fx, dfx) = f(x);
    let mut fx = sign * fx;
    let mut dfx = sign * dfx;
    for _ in 0..200 {
        if fx == 0.0 {
            return Some(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton_ok = dfx.is_finite() && dfx != 0.0 && {
            let xn = x - fx / dfx;
            (xn - a) * (xn - b) < 0.0 && (2.0 * fx).abs() <= (dx_old * dfx).abs()
        };
        dx_old = dx;
        let x_new = if newton_ok {
            dx = fx / dfx;
            x - dx
        } else {
            dx = 0.5 * (b - a);
            0.5 * (a + b)
        };
        if (x_new - x).abs() <= tol || (b - a).abs() <= tol {
            return Some(x_new);
        }
        x = x_new;
        let (v, d) = f(x);
        fx = sign * v;
        dfx = sign * d;
    }
    None
}

/// Golden-section search for a maximum of a unimodal function on `[a, b]`.
pub fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_finds_cubic_root() {
        let r = safeguarded_newton(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, true, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn newton_respects_sign_convention_at_root_endpoint() {
        // f(x) = x (x - 1): roots at 0 and 1; with lo = 0 treated as negative we must get 1
        let r = safeguarded_newton(|x| (x * (x - 1.0), 2.0 * x - 1.0), 0.0, 1.5, true, 1e-15).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bisection_fallback_on_kink() {
        let r = safeguarded_newton(|x| ((x - 0.3).abs() * (x - 0.3).signum() + 0.0, f64::NAN), -1.0, 1.0, true, 1e-15)
            .unwrap();
        assert!((r - 0.3).abs() < 1e-14);
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx) = golden_max(|x| -(x - 0.7) * (x - 0.7), 0.0, 1.0, 1e-10);
        assert!((x - 0.7).abs() < 1e-9);
        assert!(fx.abs() < 1e-17);
    }
}
