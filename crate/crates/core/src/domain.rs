//! Boundary parameters, two-interval geometry, the normalized exponential
//! `e(x) = exp(i2πx)` and the L² inner product on `Ω = [0,1] ∪ [α,β]`.
//!
//! All phases are measured in cycles: a phase `x` corresponds to the unit
//! complex number `e(x)`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::Matrix2;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Default absolute tolerance used throughout the crate.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Distance of `w` from 0 or 1 under which the closed-form regimes are used.
pub const REGIME_EPS: f64 = 1e-12;

/// `exp(i2πx)`; NaN in, NaN out.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * x).sin_cos();
    Complex64::new(c, s)
}

/// A complex number of modulus one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexOnCircle(Complex64);

impl ComplexOnCircle {
    /// `e(x)` for a finite phase `x` in cycles.
    pub fn from_cycles(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::invalid("x", format!("phase must be finite, got {x}")));
        }
        Ok(ComplexOnCircle(e(x)))
    }

    pub fn new(z: Complex64) -> Result<Self> {
        if !z.is_finite() || (z.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("z", format!("|z| = {} is not 1", z.norm())));
        }
        Ok(ComplexOnCircle(z))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    /// Argument in cycles, in `[0, 1)`.
    pub fn cycles(self) -> f64 {
        (self.0.arg() / (2.0 * PI)).rem_euclid(1.0)
    }
}

/// Which closed form (if any) governs the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `w = 0`: `B` is off-diagonal, the intervals are exchanged.
    Exchange,
    /// `0 < w < 1`.
    Mixed,
    /// `w = 1`: `B` is diagonal, two decoupled single-interval problems.
    Decoupled,
}

/// The four `U(2)` parameters of the boundary matrix
///
/// ```text
/// B = [[ w e(φ),          -√(1-w²) e(θ-ψ) ],
///      [ √(1-w²) e(ψ),     w e(θ-φ)       ]]
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryParams {
    pub w: f64,
    pub phi: f64,
    pub psi: f64,
    pub theta: f64,
}

impl BoundaryParams {
    pub fn new(w: f64, phi: f64, psi: f64, theta: f64) -> Result<Self> {
        let p = BoundaryParams { w, phi, psi, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("w", self.w), ("phi", self.phi), ("psi", self.psi), ("theta", self.theta)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.w) {
            return Err(Error::invalid("w", format!("0 <= w <= 1 violated, got {}", self.w)));
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        if self.w <= REGIME_EPS {
            Regime::Exchange
        } else if self.w >= 1.0 - REGIME_EPS {
            Regime::Decoupled
        } else {
            Regime::Mixed
        }
    }

    /// `√(1-w²)`.
    pub fn coupling(&self) -> f64 {
        (1.0 - self.w * self.w).max(0.0).sqrt()
    }

    pub fn with_w(self, w: f64) -> Self {
        BoundaryParams { w, ..self }
    }

    pub fn with_psi(self, psi: f64) -> Self {
        BoundaryParams { psi, ..self }
    }

    /// The boundary matrix, acting as `B (f(1), f(β))ᵀ = (f(0), f(α))ᵀ`.
    pub fn boundary_matrix(&self) -> Matrix2<Complex64> {
        let s = self.coupling();
        Matrix2::new(
            e(self.phi) * self.w,
            -e(self.theta - self.psi) * s,
            e(self.psi) * s,
            e(self.theta - self.phi) * self.w,
        )
    }
}

/// Exactness tag for the length `β - α` of the second interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum LengthTag {
    /// Only a float is known; structural questions are answered with tolerances.
    Float,
    /// `β - α = p/q` exactly.
    Rational(Ratio<i64>),
    /// Declared irrational by the caller.
    Irrational,
}

/// Parses `p/q` or an integer into an exact rational.
pub fn parse_ratio(s: &str) -> std::result::Result<Ratio<i64>, String> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: i64 = p.parse().map_err(|_| format!("bad numerator in `{s}`"))?;
    let q: i64 = q.parse().map_err(|_| format!("bad denominator in `{s}`"))?;
    if q == 0 {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Ratio::new(p, q))
}

/// The geometry `I₁ = [0,1]`, `I₂ = [α,β]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalPair {
    pub alpha: f64,
    pub beta: f64,
    pub length: LengthTag,
    /// Exact endpoints, when the caller supplied them.
    #[serde(skip)]
    exact: Option<(Ratio<i64>, Ratio<i64>)>,
}

impl IntervalPair {
    /// Float geometry with no exactness information.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let d = IntervalPair {
            alpha,
            beta,
            length: LengthTag::Float,
            exact: None,
        };
        d.validate()?;
        Ok(d)
    }

    /// `[0,1] ∪ [α, α + p/q]` with the length tagged as exactly rational.
    pub fn with_rational_length(alpha: f64, p: i64, q: i64) -> Result<Self> {
        if q <= 0 || p <= 0 {
            return Err(Error::invalid("length", format!("need p, q > 0, got {p}/{q}")));
        }
        let r = Ratio::new(p, q);
        let mut d = IntervalPair::new(alpha, alpha + ratio_f64(r))?;
        d.length = LengthTag::Rational(r);
        Ok(d)
    }

    /// `[0,1] ∪ [α, α + len]` with `len` declared irrational.
    pub fn with_irrational_length(alpha: f64, len: f64) -> Result<Self> {
        let mut d = IntervalPair::new(alpha, alpha + len)?;
        d.length = LengthTag::Irrational;
        Ok(d)
    }

    /// Exact rational endpoints; the length is tagged rational.
    pub fn exact(alpha: Ratio<i64>, beta: Ratio<i64>) -> Result<Self> {
        let mut d = IntervalPair::new(ratio_f64(alpha), ratio_f64(beta))?;
        if beta <= alpha {
            return Err(Error::invalid("beta", "alpha < beta violated"));
        }
        d.length = LengthTag::Rational(beta - alpha);
        d.exact = Some((alpha, beta));
        Ok(d)
    }

    pub fn integers(alpha: i64, beta: i64) -> Result<Self> {
        IntervalPair::exact(Ratio::from_integer(alpha), Ratio::from_integer(beta))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::invalid("alpha", "endpoints must be finite"));
        }
        if self.alpha < 1.0 {
            return Err(Error::invalid("alpha", format!("1 <= alpha violated, got {}", self.alpha)));
        }
        if self.beta <= self.alpha {
            return Err(Error::invalid(
                "beta",
                format!("alpha < beta violated, got alpha = {}, beta = {}", self.alpha, self.beta),
            ));
        }
        Ok(())
    }

    /// `β - α`, using the exact tag when present.
    pub fn length(&self) -> f64 {
        match self.length {
            LengthTag::Rational(r) => ratio_f64(r),
            _ => self.beta - self.alpha,
        }
    }

    /// Total measure `1 + β - α`.
    pub fn total_length(&self) -> f64 {
        1.0 + self.length()
    }

    /// The intervals touch at `x = 1`; values there are one-sided limits.
    pub fn is_touching(&self) -> bool {
        self.alpha == 1.0
    }

    pub fn rational_length(&self) -> Option<Ratio<i64>> {
        match self.length {
            LengthTag::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn exact_endpoints(&self) -> Option<(Ratio<i64>, Ratio<i64>)> {
        self.exact
    }

    /// Moves `I₂` by `c`, keeping the length tag.
    pub fn translated(&self, c: f64) -> Result<Self> {
        let mut d = IntervalPair::new(self.alpha + c, self.beta + c)?;
        d.length = self.length;
        Ok(d)
    }
}

impl fmt::Display for IntervalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[0,1] ∪ [{}, {}]", self.alpha, self.beta)
    }
}

pub(crate) fn ratio_f64(r: Ratio<i64>) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let y = PI * x;
        let y2 = y * y;
        1.0 - y2 / 6.0 + y2 * y2 / 120.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// `∫_a^b e(t x) dx` in a form without cancellation at small `t`.
pub fn exp_integral(t: f64, a: f64, b: f64) -> Complex64 {
    e(0.5 * t * (a + b)) * ((b - a) * sinc(t * (b - a)))
}

/// `⟨e_t | 1⟩ = ∫_Ω e(t x) dx`.
pub fn exp_moment(t: f64, d: &IntervalPair) -> Complex64 {
    exp_integral(t, 0.0, 1.0) + exp_integral(t, d.alpha, d.beta)
}

/// `⟨e_λ | e_μ⟩` over `Ω`, in closed form.
pub fn exp_inner(lambda: f64, mu: f64, d: &IntervalPair) -> Complex64 {
    exp_moment(lambda - mu, d)
}

/// A function of the form `(a χ_{I₁} + b χ_{I₂}) e_λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseExp {
    pub lambda: f64,
    pub a: Complex64,
    pub b: Complex64,
}

impl PiecewiseExp {
    pub fn new(lambda: f64, a: Complex64, b: Complex64) -> Self {
        PiecewiseExp { lambda, a, b }
    }

    /// Value on `I₁` (`first = true`) or `I₂` at `x`.
    pub fn eval(&self, x: f64, first: bool) -> Complex64 {
        let c = if first { self.a } else { self.b };
        c * e(self.lambda * x)
    }

    /// `⟨self | other⟩`, closed form.
    pub fn inner(&self, other: &PiecewiseExp, d: &IntervalPair) -> Complex64 {
        let t = self.lambda - other.lambda;
        self.a * other.a.conj() * exp_integral(t, 0.0, 1.0)
            + self.b * other.b.conj() * exp_integral(t, d.alpha, d.beta)
    }

    pub fn norm_sqr(&self, d: &IntervalPair) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() * d.length()
    }
}

/// `⟨f | g⟩ = ∫_{I₁} f ḡ + ∫_{I₂} f ḡ` for analytic `f`, `g`, by adaptive quadrature.
pub fn inner_product_fn<F, G>(d: &IntervalPair, f: F, g: G, tol: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    let h = |x: f64| f(x) * g(x).conj();
    quadrature::integrate_complex(h, 0.0, 1.0, 0.5 * tol)
        + quadrature::integrate_complex(h, d.alpha, d.beta, 0.5 * tol)
}

/// Uniform samples of a function on `I₁` and `I₂`.
///
/// `I₁` and `I₂` keep separate node sets, so when `α = 1` the two values at
/// `x = 1` are the one-sided limits.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    geometry: IntervalPair,
    points_per_unit: usize,
    pub first: Vec<Complex64>,
    pub second: Vec<Complex64>,
}

impl GridFunction {
    /// Samples `f` at `points_per_unit` intervals per unit length.
    pub fn sample<F: Fn(f64) -> Complex64>(d: &IntervalPair, points_per_unit: usize, f: F) -> Self {
        let mut g = GridFunction::zeros(d, points_per_unit);
        let n1 = g.first.len();
        for (i, v) in g.first.iter_mut().enumerate() {
            *v = f(Self::node(0.0, 1.0, i, n1));
        }
        let n2 = g.second.len();
        for (i, v) in g.second.iter_mut().enumerate() {
            *v = f(Self::node(d.alpha, d.beta, i, n2));
        }
        g
    }

    pub fn zeros(d: &IntervalPair, points_per_unit: usize) -> Self {
        let n1 = points_per_unit.max(2);
        let n2 = ((d.beta - d.alpha) * points_per_unit as f64).round().max(2.0) as usize;
        GridFunction {
            geometry: *d,
            points_per_unit,
            first: vec![Complex64::zero(); n1 + 1],
            second: vec![Complex64::zero(); n2 + 1],
        }
    }

    fn node(a: f64, b: f64, i: usize, len: usize) -> f64 {
        if i + 1 == len {
            b
        } else {
            a + (b - a) * i as f64 / (len - 1) as f64
        }
    }

    pub fn geometry(&self) -> &IntervalPair {
        &self.geometry
    }

    pub fn points_per_unit(&self) -> usize {
        self.points_per_unit
    }

    /// Nodes of `I₁` followed by nodes of `I₂`, with the interval flag.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, bool)> + '_ {
        let (n1, n2) = (self.first.len(), self.second.len());
        let d = self.geometry;
        (0..n1)
            .map(move |i| (Self::node(0.0, 1.0, i, n1), true))
            .chain((0..n2).map(move |i| (Self::node(d.alpha, d.beta, i, n2), false)))
    }

    pub fn values(&self) -> impl Iterator<Item = &Complex64> {
        self.first.iter().chain(self.second.iter())
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut Complex64> {
        self.first.iter_mut().chain(self.second.iter_mut())
    }

    /// Trapezoid weights matching [`GridFunction::nodes`].
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        let w = |len: usize, width: f64| {
            let h = width / (len - 1) as f64;
            (0..len).map(move |i| if i == 0 || i + 1 == len { 0.5 * h } else { h })
        };
        w(self.first.len(), 1.0).chain(w(self.second.len(), self.geometry.beta - self.geometry.alpha))
    }

    pub fn check_compatible(&self, other: &GridFunction) -> Result<()> {
        if self.geometry.alpha != other.geometry.alpha
            || self.geometry.beta != other.geometry.beta
            || self.first.len() != other.first.len()
            || self.second.len() != other.second.len()
        {
            return Err(Error::DomainMismatch(format!(
                "grids on {} ({} pts/unit) and {} ({} pts/unit)",
                self.geometry, self.points_per_unit, other.geometry, other.points_per_unit
            )));
        }
        Ok(())
    }

    /// Trapezoid approximation of `⟨self | other⟩`.
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        self.check_compatible(other)?;
        Ok(self
            .values()
            .zip(other.values())
            .zip(self.weights())
            .map(|((f, g), w)| f * g.conj() * w)
            .sum())
    }

    /// `⟨self | u⟩` for a piecewise exponential `u`, by the trapezoid rule.
    pub fn inner_exp(&self, u: &PiecewiseExp) -> Complex64 {
        self.nodes()
            .zip(self.values())
            .zip(self.weights())
            .map(|(((x, first), f), w)| f * u.eval(x, first).conj() * w)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.values()
            .zip(self.weights())
            .map(|(f, w)| f.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    /// L² norm restricted to `[lo, hi]` (node-wise trapezoid weights).
    pub fn norm_on(&self, lo: f64, hi: f64) -> f64 {
        self.nodes()
            .zip(self.values())
            .zip(self.weights())
            .filter(|(((x, _), _), _)| *x >= lo && *x <= hi)
            .map(|((_, f), w)| f.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.values_mut().zip(other.values()) {
            *a -= b;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn exponential_special_values() {
        assert!(close(e(0.0), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(e(0.5), Complex64::new(-1.0, 0.0), 1e-15));
        assert!(close(e(0.25), Complex64::new(0.0, 1.0), 1e-15));
        assert!(ComplexOnCircle::from_cycles(f64::NAN).is_err());
        assert!(ComplexOnCircle::from_cycles(f64::INFINITY).is_err());
        assert_abs_diff_eq!(ComplexOnCircle::from_cycles(1.75).unwrap().cycles(), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn boundary_matrix_examples() {
        let id = BoundaryParams::new(1.0, 0.0, 0.0, 0.0).unwrap().boundary_matrix();
        assert!(close(id[(0, 0)], Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(id[(0, 1)], Complex64::zero(), 1e-15));
        assert!(close(id[(1, 0)], Complex64::zero(), 1e-15));
        assert!(close(id[(1, 1)], Complex64::new(1.0, 0.0), 1e-15));

        // each entry has modulus 1/√2, so the common factor of (1∓i) is 1/2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = BoundaryParams::new(s, -0.125, 0.125, -0.25).unwrap().boundary_matrix();
        let m = Complex64::new(0.5, -0.5);
        let p = Complex64::new(0.5, 0.5);
        assert!(close(b[(0, 0)], m, 1e-12));
        assert!(close(b[(0, 1)], p, 1e-12));
        assert!(close(b[(1, 0)], p, 1e-12));
        assert!(close(b[(1, 1)], m, 1e-12));

        let off = BoundaryParams::new(0.0, 0.0, 0.0, 0.0).unwrap().boundary_matrix();
        assert!(close(off[(0, 1)], Complex64::new(-1.0, 0.0), 1e-15));
        assert!(close(off[(1, 0)], Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(off[(0, 0)], Complex64::zero(), 1e-15));
    }

    #[test]
    fn parameter_validation() {
        assert!(BoundaryParams::new(1.2, 0.0, 0.0, 0.0).is_err());
        assert!(BoundaryParams::new(-0.1, 0.0, 0.0, 0.0).is_err());
        assert!(BoundaryParams::new(0.5, f64::NAN, 0.0, 0.0).is_err());
        assert!(IntervalPair::new(0.5, 2.0).is_err());
        assert!(IntervalPair::new(2.0, 2.0).is_err());
        let touching = IntervalPair::new(1.0, 2.0).unwrap();
        assert!(touching.is_touching());
        assert_eq!(
            IntervalPair::with_rational_length(2.0, 3, 2).unwrap().rational_length(),
            Some(Ratio::new(3, 2))
        );
    }

    #[test]
    fn inner_product_examples() {
        let d = IntervalPair::new(2.0, 3.0).unwrap();
        let one = |_x: f64| Complex64::new(1.0, 0.0);
        assert_abs_diff_eq!(inner_product_fn(&d, one, one, 1e-12).re, 2.0, epsilon = 1e-12);
        assert!(close(exp_moment(0.0, &d), Complex64::new(d.total_length(), 0.0), 1e-15));
        assert!(exp_inner(1.0, 0.0, &d).norm() < 1e-15);
        // quadrature oracle for the same value
        let q = inner_product_fn(&d, e, one, 1e-13);
        assert!(q.norm() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let d1 = IntervalPair::new(2.0, 3.0).unwrap();
        let d2 = IntervalPair::new(2.0, 4.0).unwrap();
        let f = GridFunction::sample(&d1, 64, |_| Complex64::new(1.0, 0.0));
        let g = GridFunction::sample(&d2, 64, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(f.inner(&g), Err(Error::DomainMismatch(_))));
        assert_abs_diff_eq!(f.inner(&f).unwrap().re, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn touching_intervals_keep_one_sided_values() {
        let d = IntervalPair::new(1.0, 2.0).unwrap();
        let u = PiecewiseExp::new(0.3, Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0));
        let g = GridFunction::sample(&d, 16, |_| Complex64::zero());
        let at_one: Vec<_> = g.nodes().filter(|(x, _)| *x == 1.0).collect();
        assert_eq!(at_one.len(), 2);
        assert!((u.eval(1.0, true) - u.eval(1.0, false) * 2.0).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn boundary_matrix_is_unitary(w in 0.0f64..=1.0, phi in -3.0f64..3.0, psi in -3.0f64..3.0, theta in -3.0f64..3.0) {
            let b = BoundaryParams::new(w, phi, psi, theta).unwrap().boundary_matrix();
            let prod = b.adjoint() * b;
            for i in 0..2 {
                for j in 0..2 {
                    let target = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((prod[(i, j)] - Complex64::new(target, 0.0)).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn closed_form_matches_quadrature(lam in -6.0f64..6.0, mu in -6.0f64..6.0, alpha in 1.0f64..4.0, len in 0.1f64..3.0) {
            let d = IntervalPair::new(alpha, alpha + len).unwrap();
            let exact = exp_inner(lam, mu, &d);
            let quad = inner_product_fn(&d, |x| e(lam * x), |x| e(mu * x), 1e-12);
            prop_assert!((exact - quad).norm() < 1e-10);
        }

        #[test]
        fn inner_product_is_positive(coefs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -5i32..5), 1..6)) {
            let d = IntervalPair::new(2.0, 3.5).unwrap();
            let f = |x: f64| coefs.iter().map(|&(re, im, k)| Complex64::new(re, im) * e(k as f64 * 0.37 * x)).sum::<Complex64>();
            let n = inner_product_fn(&d, f, f, 1e-12);
            prop_assert!(n.im.abs() < 1e-10);
            let any_nonzero = coefs.iter().any(|&(re, im, _)| re != 0.0 || im != 0.0);
            if any_nonzero { prop_assert!(n.re > 0.0); } else { prop_assert!(n.re.abs() < 1e-14); }
        }
    }
}
