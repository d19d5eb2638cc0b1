//! Real and complex arithmetic shared by the propagators.
//!
//! The propagators only need `cos √x` and `sin √x / √x`, both entire in `x`.
//! They are evaluated without branch cuts so that a complex step of size
//! `1e-100` in `λ` survives to the output.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Below this `|x|` the Taylor series is used.
const TAYLOR_RADIUS: f64 = 0.5;
const TAYLOR_TERMS: usize = 14;

pub trait Field:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + std::fmt::Debug
    + Send
    + Sync
    + 'static
{
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    /// `cos √x`.
    fn cosq(self) -> Self;
    /// `sin √x / √x`.
    fn sincq(self) -> Self;
}

/// Taylor sums of `cos √x` and `sin √x / √x`.
fn taylor<T: Field>(x: T) -> (T, T) {
    let mut c = T::from_real(0.0);
    let mut s = T::from_real(0.0);
    // Horner in -x with coefficients 1/(2n)! and 1/(2n+1)!.
    for n in (0..TAYLOR_TERMS).rev() {
        let a = 1.0 / ((2 * n + 1) * (2 * n + 2)) as f64;
        let b = 1.0 / ((2 * n + 2) * (2 * n + 3)) as f64;
        c = T::from_real(1.0) - x * c * a;
        s = T::from_real(1.0) - x * s * b;
    }
    (c, s)
}

impl Field for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn cosq(self) -> Self {
        if self.abs() < TAYLOR_RADIUS {
            taylor(self).0
        } else if self > 0.0 {
            self.sqrt().cos()
        } else {
            (-self).sqrt().cosh()
        }
    }
    fn sincq(self) -> Self {
        if self.abs() < TAYLOR_RADIUS {
            taylor(self).1
        } else if self > 0.0 {
            let w = self.sqrt();
            w.sin() / w
        } else {
            let w = (-self).sqrt();
            w.sinh() / w
        }
    }
}

/// Principal square root, accurate in the imaginary part for tiny `Im z`.
pub fn csqrt(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    if a == 0.0 && b == 0.0 {
        return Complex64::new(0.0, b);
    }
    let t = ((a.abs() + z.norm()) / 2.0).sqrt();
    if a >= 0.0 {
        Complex64::new(t, b / (2.0 * t))
    } else {
        Complex64::new(b.abs() / (2.0 * t), t.copysign(b))
    }
}

impl Field for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn cosq(self) -> Self {
        if self.norm() < TAYLOR_RADIUS {
            taylor(self).0
        } else if self.re >= 0.0 {
            csqrt(self).cos()
        } else {
            csqrt(-self).cosh()
        }
    }
    fn sincq(self) -> Self {
        if self.norm() < TAYLOR_RADIUS {
            taylor(self).1
        } else if self.re >= 0.0 {
            let w = csqrt(self);
            w.sin() / w
        } else {
            let w = csqrt(-self);
            w.sinh() / w
        }
    }
}

/// 2×2 matrix `[[a, b], [c, d]]` acting on column vectors `(y, y')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Field> Mat2<T> {
    pub fn identity() -> Self {
        Mat2 {
            a: T::from_real(1.0),
            b: T::from_real(0.0),
            c: T::from_real(0.0),
            d: T::from_real(1.0),
        }
    }

    /// `self · rhs`.
    #[inline]
    pub fn mul(&self, rhs: &Self) -> Self {
        Mat2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn max_modulus(&self) -> f64 {
        self.a
            .modulus()
            .max(self.b.modulus())
            .max(self.c.modulus())
            .max(self.d.modulus())
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        (self.a - other.a)
            .modulus()
            .max((self.b - other.b).modulus())
            .max((self.c - other.c).modulus())
            .max((self.d - other.d).modulus())
    }

    pub fn lerp_extrapolate(&self, coarse: &Self, weight: f64) -> Self {
        Mat2 {
            a: self.a + (self.a - coarse.a) * weight,
            b: self.b + (self.b - coarse.b) * weight,
            c: self.c + (self.c - coarse.c) * weight,
            d: self.d + (self.d - coarse.d) * weight,
        }
    }
}
