//! The circle Möbius map `M_w(z) = (wz - 1)/(z - w)` and its argument lift.
//!
//! The lift `g` is the continuous decreasing function with `g(0) = -1/2` and
//! `e(g(t)) = M_w(e(t))`. Its derivative is minus the Poisson kernel
//!
//! ```text
//! g'(t) = -(1 - w²) / (1 - 2w cos 2πt + w²)
//! ```
//!
//! and it satisfies `g(t + n) = g(t) - n`. On each period the antiderivative
//! of the kernel is a tan-half-angle arctangent; the period offset is added
//! exactly, so continuity never depends on an arctan branch.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_open(w: f64) -> Result<()> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::WrongRegime {
            w,
            route: "the closed-form spectra (lift requires 0 < w < 1)",
        });
    }
    Ok(())
}

/// `M_w(z) = (wz - 1)/(z - w)`.
pub fn moebius(w: f64, z: Complex64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&w) || !w.is_finite() {
        return Err(Error::invalid("w", format!("0 <= w < 1 violated, got {w}")));
    }
    let den = z - w;
    if den.norm() == 0.0 {
        return Err(Error::Pole(w));
    }
    Ok((z * w - 1.0) / den)
}

/// Lift without range checks; callers guarantee `0 <= w < 1`.
#[inline]
pub(crate) fn g_unchecked(w: f64, t: f64) -> f64 {
    let n = t.round();
    let r = t - n;
    if r.abs() == 0.5 {
        // g(k + 1/2) = -1 - k
        return -0.5 - t;
    }
    let (s, c) = (PI * r).sin_cos();
    let p = n + ((1.0 + w) * s).atan2((1.0 - w) * c) / PI;
    -0.5 - p
}

#[inline]
pub(crate) fn g_prime_unchecked(w: f64, t: f64) -> f64 {
    let c = (2.0 * PI * t).cos();
    -(1.0 - w * w) / (1.0 - 2.0 * w * c + w * w)
}

/// The argument lift `g(t)`.
pub fn lift_g(w: f64, t: f64) -> Result<f64> {
    check_open(w)?;
    Ok(g_unchecked(w, t))
}

/// `g'(t)`, strictly negative.
pub fn lift_g_derivative(w: f64, t: f64) -> Result<f64> {
    check_open(w)?;
    Ok(g_prime_unchecked(w, t))
}

/// The single-arctan expression `(1/2π) arctan((1-w²) sin 2πt / (2w - (1+w²) cos 2πt))`.
///
/// Agrees with `g(t)` modulo 1 only where the denominator is positive; on the
/// other side it is off by one half.
pub fn lift_g_arctan(w: f64, t: f64) -> Result<f64> {
    check_open(w)?;
    let (s, c) = (2.0 * PI * t).sin_cos();
    let num = (1.0 - w * w) * s;
    let den = 2.0 * w - (1.0 + w * w) * c;
    Ok((num / den).atan() / (2.0 * PI))
}

/// Sign of the arctan denominator; positive means the arctan form is on the right branch.
pub fn arctan_branch_denominator(w: f64, t: f64) -> f64 {
    2.0 * w - (1.0 + w * w) * (2.0 * PI * t).cos()
}

/// `g` bound to a fixed `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftFunction {
    w: f64,
}

impl LiftFunction {
    pub fn new(w: f64) -> Result<Self> {
        check_open(w)?;
        Ok(LiftFunction { w })
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn eval(&self, t: f64) -> f64 {
        g_unchecked(self.w, t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        g_prime_unchecked(self.w, t)
    }

    /// Bounds on `-g'`: `[(1-w)/(1+w), (1+w)/(1-w)]`.
    pub fn slope_bounds(&self) -> (f64, f64) {
        let w = self.w;
        ((1.0 - w) / (1.0 + w), (1.0 + w) / (1.0 - w))
    }

    pub fn moebius(&self, z: Complex64) -> Result<Complex64> {
        moebius(self.w, z)
    }
}
