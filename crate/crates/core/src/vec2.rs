use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector with the given direction angle.
    #[inline]
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2 { x: c, y: s }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the planar cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn normalized(self) -> Vec2 {
        self / self.norm()
    }

    /// Counterclockwise rotation by a quarter turn.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Direction angle in `[0, 2π)`.
    #[inline]
    pub fn angle(self) -> f64 {
        normalize_angle(self.y.atan2(self.x))
    }

    #[inline]
    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Reduce an angle to `[0, 2π)`.
#[inline]
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(std::f64::consts::TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if r >= std::f64::consts::TAU {
        0.0
    } else {
        r
    }
}

/// Reduce an angle to `(-π, π]`.
#[inline]
pub fn wrap_to_pi(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = normalize_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Orientation-preserving affine map `x ↦ M x + b` of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine2 {
    /// Row-major 2×2 linear part.
    pub m: [[f64; 2]; 2],
    pub b: Vec2,
}

impl Default for Affine2 {
    fn default() -> Self {
        Affine2::IDENTITY
    }
}

impl Affine2 {
    pub const IDENTITY: Affine2 = Affine2 {
        m: [[1.0, 0.0], [0.0, 1.0]],
        b: Vec2::ZERO,
    };

    pub fn new(m: [[f64; 2]; 2], b: Vec2) -> Self {
        Affine2 { m, b }
    }

    pub fn translation(b: Vec2) -> Self {
        Affine2 { b, ..Affine2::IDENTITY }
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Affine2 {
            m: [[c, -s], [s, c]],
            b: Vec2::ZERO,
        }
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    #[inline]
    pub fn linear(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    /// Transpose of the linear part applied to `v`.
    #[inline]
    pub fn linear_t(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * v.x + self.m[1][0] * v.y,
            self.m[0][1] * v.x + self.m[1][1] * v.y,
        )
    }

    #[inline]
    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.linear(p) + self.b
    }

    #[inline]
    pub fn inverse_linear(&self, v: Vec2) -> Vec2 {
        let d = self.det();
        Vec2::new(
            (self.m[1][1] * v.x - self.m[0][1] * v.y) / d,
            (-self.m[1][0] * v.x + self.m[0][0] * v.y) / d,
        )
    }

    #[inline]
    pub fn inverse_apply(&self, p: Vec2) -> Vec2 {
        self.inverse_linear(p - self.b)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Affine2) -> Affine2 {
        let a = &self.m;
        let o = &other.m;
        Affine2 {
            m: [
                [
                    a[0][0] * o[0][0] + a[0][1] * o[1][0],
                    a[0][0] * o[0][1] + a[0][1] * o[1][1],
                ],
                [
                    a[1][0] * o[0][0] + a[1][1] * o[1][0],
                    a[1][0] * o[0][1] + a[1][1] * o[1][1],
                ],
            ],
            b: self.apply(other.b),
        }
    }

    pub fn is_identity_linear(&self) -> bool {
        self.m == Affine2::IDENTITY.m
    }

    /// Uniform scale factor when the linear part is a similarity.
    pub fn similarity_scale(&self) -> Option<f64> {
        let [[a, b], [c, d]] = self.m;
        let c0 = a * a + c * c;
        let c1 = b * b + d * d;
        let off = a * b + c * d;
        let tol = 1e-14 * (c0 + c1);
        if (c0 - c1).abs() <= tol && off.abs() <= tol {
            Some(c0.sqrt())
        } else {
            None
        }
    }
}
