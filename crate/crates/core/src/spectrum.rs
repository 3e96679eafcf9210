//! Eigenvalues and eigenfunctions of the extension `P_B`.
//!
//! `λ` is an eigenvalue iff the master residual
//!
//! ```text
//! F(λ) = (e(φ+λ) - w) e(θ-φ+dλ) - (w e(φ+λ) - 1),    d = β - α
//! ```
//!
//! vanishes. For `0 < w < 1` the argument lift turns this into
//! `h(λ) ∈ ℤ` with `h(t) = θ - φ + dt - g(φ+t)` strictly increasing, so the
//! spectrum is a sequence `λ_n` with `h(λ_n) = n`. At `w = 0` and `w = 1` the
//! spectrum is a union of lattices and is computed in closed form; branch
//! indices there are the `w → 0⁺`, `w → 1⁻` limits of `λ_n`.

use std::collections::HashSet;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::domain::{e, exp_moment, BoundaryParams, IntervalPair, LengthTag, PiecewiseExp, Regime};
use crate::error::{Error, Result};
use crate::moebius::{g_prime_unchecked, g_unchecked};

/// Acceptance threshold for `|F(λ)|` at a computed eigenvalue.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Float tolerance for deciding that two lattice points coincide at `w = 1`.
pub const COINCIDENCE_TOL: f64 = 1e-9;

const MAX_ITER: usize = 200;

/// One point of the spectrum with eigenfunction `(a χ_{I₁} + b χ_{I₂}) e_λ`.
///
/// A multiplicity-2 entry carries the index of the lower of its two
/// branches; its eigenspace is spanned by `(1,0)` and `(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueEntry {
    pub n: i64,
    pub lambda: f64,
    pub multiplicity: u8,
    pub a: Complex64,
    pub b: Complex64,
    /// `|F(λ)|`.
    pub residual: f64,
}

impl EigenvalueEntry {
    /// Coefficient pairs spanning the eigenspace.
    pub fn modes(&self) -> Vec<(Complex64, Complex64)> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        if self.multiplicity == 2 {
            vec![(one, zero), (zero, one)]
        } else {
            vec![(self.a, self.b)]
        }
    }

    pub fn eigenfunctions(&self) -> Vec<PiecewiseExp> {
        self.modes()
            .into_iter()
            .map(|(a, b)| PiecewiseExp::new(self.lambda, a, b))
            .collect()
    }

    /// Branch indices covered by this entry.
    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.n..=self.n + self.multiplicity as i64 - 1
    }
}

/// What is known about the global shape of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SpectrumStructure {
    /// `w = 1`: `(-φ + ℤ) ∪ ((φ-θ)/d + ℤ/d)`.
    LatticeUnion,
    /// `w = 0`: `(1/2 - θ)/L + ℤ/L`.
    SingleLattice,
    /// `0 < w < 1`, `d = p/q`: `p + q` points per period `q`.
    RationalPeriodic { p: i64, q: i64 },
    /// `0 < w < 1`, `d` declared irrational.
    Aperiodic,
    /// `0 < w < 1` with an untagged float length.
    Unclassified,
}

/// Finite ordered piece of the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSlice {
    pub entries: Vec<EigenvalueEntry>,
    pub window: (f64, f64),
    pub structure: SpectrumStructure,
}

impl SpectrumSlice {
    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest gap between consecutive distinct eigenvalues.
    pub fn min_gap(&self) -> Option<f64> {
        self.entries
            .windows(2)
            .map(|w| w[1].lambda - w[0].lambda)
            .min_by(f64::total_cmp)
    }

    /// Eigenvalues in `[lo, hi)`, counted with multiplicity.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.entries
            .iter()
            .filter(|e| e.lambda >= lo && e.lambda < hi)
            .map(|e| e.multiplicity as usize)
            .sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }
}

/// `F(λ)`; zero exactly on the spectrum.
pub fn master_residual(p: &BoundaryParams, d: &IntervalPair, lambda: f64) -> Complex64 {
    let z = e(p.phi + lambda);
    (z - p.w) * e(p.theta - p.phi + d.length() * lambda) - (z * p.w - 1.0)
}

fn check_mixed(p: &BoundaryParams) -> Result<()> {
    match p.regime() {
        Regime::Mixed => Ok(()),
        Regime::Exchange => Err(Error::WrongRegime {
            w: p.w,
            route: "closed_form_w0",
        }),
        Regime::Decoupled => Err(Error::WrongRegime {
            w: p.w,
            route: "closed_form_w1",
        }),
    }
}

fn check_window(lo: f64, hi: f64) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::invalid("window", format!("need finite lo <= hi, got [{lo}, {hi}]")));
    }
    Ok(())
}

#[inline]
fn h_unchecked(p: &BoundaryParams, d: &IntervalPair, t: f64) -> f64 {
    p.theta - p.phi + d.length() * t - g_unchecked(p.w, p.phi + t)
}

/// `h(t) = θ - φ + dt - g(φ+t)`.
pub fn h_function(p: &BoundaryParams, d: &IntervalPair, t: f64) -> Result<f64> {
    check_mixed(p)?;
    Ok(h_unchecked(p, d, t))
}

/// `h'(t) = d - g'(φ+t) >= d + (1-w)/(1+w)`.
pub fn h_derivative(p: &BoundaryParams, d: &IntervalPair, t: f64) -> Result<f64> {
    check_mixed(p)?;
    Ok(d.length() - g_prime_unchecked(p.w, p.phi + t))
}

/// Interval certain to contain `λ_n`.
///
/// `h(t) - θ - 1/2 - Lt` lies strictly inside `(-1/2, 1/2)`, which gives
/// `λ_n ∈ [(n-θ-1)/L, (n-θ)/L]` for every `w`.
pub fn branch_bracket(p: &BoundaryParams, d: &IntervalPair, n: i64) -> (f64, f64) {
    let l = d.total_length();
    ((n as f64 - p.theta - 1.0) / l, (n as f64 - p.theta) / l)
}

/// `a` for `0 < w < 1` with `b = 1`.
pub fn mixed_coefficient(p: &BoundaryParams, d: &IntervalPair, lambda: f64) -> Complex64 {
    e(p.theta - p.psi + d.beta * lambda) * p.coupling() / (e(p.phi + lambda) * p.w - 1.0)
}

/// `λ_n` for `0 < w < 1`: bisection on the certified bracket with Newton steps.
pub fn solve_branch(p: &BoundaryParams, d: &IntervalPair, n: i64) -> Result<EigenvalueEntry> {
    check_mixed(p)?;
    let target = n as f64;
    let f = |t: f64| h_unchecked(p, d, t) - target;
    let (mut lo, mut hi) = branch_bracket(p, d, n);
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::Solver(format!("no sign change of h - {n} on [{lo}, {hi}]")));
    }
    let floor = 1e-12_f64.max(8.0 * f64::EPSILON * (target.abs() + p.theta.abs() + p.phi.abs() + 1.0));
    let mut t = 0.5 * (lo + hi);
    let mut fv = f(t);
    for _ in 0..MAX_ITER {
        if fv.abs() < 0.1 * floor {
            break;
        }
        if fv < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let step = t - fv / (d.length() - g_prime_unchecked(p.w, p.phi + t));
        t = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        fv = f(t);
        if hi - lo <= 2.0 * f64::EPSILON * t.abs().max(1.0) {
            break;
        }
    }
    // near w = 1 the slope of h can exceed 1e6, so one ulp of t moves h by more than 1e-12
    let slope = d.length() - g_prime_unchecked(p.w, p.phi + t);
    if fv.abs() >= floor.max(4.0 * slope * f64::EPSILON * t.abs().max(1.0)) {
        return Err(Error::Solver(format!("branch {n}: |h - n| = {:e} after {MAX_ITER} steps", fv.abs())));
    }
    let residual = master_residual(p, d, t).norm();
    if residual >= RESIDUAL_TOL {
        return Err(Error::Solver(format!("branch {n}: |F(λ)| = {residual:e}")));
    }
    Ok(EigenvalueEntry {
        n,
        lambda: t,
        multiplicity: 1,
        a: mixed_coefficient(p, d, t),
        b: Complex64::new(1.0, 0.0),
        residual,
    })
}

fn mixed_structure(d: &IntervalPair) -> SpectrumStructure {
    match d.length {
        LengthTag::Rational(r) => SpectrumStructure::RationalPeriodic {
            p: *r.numer(),
            q: *r.denom(),
        },
        LengthTag::Irrational => SpectrumStructure::Aperiodic,
        LengthTag::Float => SpectrumStructure::Unclassified,
    }
}

fn w0_entry(p: &BoundaryParams, d: &IntervalPair, n: i64) -> EigenvalueEntry {
    let lambda = (n as f64 - 0.5 - p.theta) / d.total_length();
    EigenvalueEntry {
        n,
        lambda,
        multiplicity: 1,
        a: -e(p.theta - p.psi + d.beta * lambda),
        b: Complex64::new(1.0, 0.0),
        residual: master_residual(p, d, lambda).norm(),
    }
}

/// Spectrum for `w = 0`: `λ_n = (n - 1/2 - θ)/L`, all simple.
pub fn closed_form_w0(p: &BoundaryParams, d: &IntervalPair, lo: f64, hi: f64) -> Result<SpectrumSlice> {
    if p.regime() != Regime::Exchange {
        return Err(Error::WrongRegime { w: p.w, route: "solve_branch or closed_form_w1" });
    }
    check_window(lo, hi)?;
    let l = d.total_length();
    let first = (lo * l + p.theta + 0.5).ceil() as i64;
    let last = (hi * l + p.theta + 0.5).floor() as i64;
    let entries = (first..=last)
        .map(|n| w0_entry(p, d, n))
        .filter(|x| x.lambda >= lo && x.lambda <= hi)
        .collect();
    Ok(SpectrumSlice {
        entries,
        window: (lo, hi),
        structure: SpectrumStructure::SingleLattice,
    })
}

fn near_integer(x: f64) -> (i64, f64) {
    let k = x.round();
    (k as i64, (x - k).abs())
}

/// Spectrum for `w = 1`: `Λ₁ = -φ + ℤ` on `I₁` and `Λ₂ = (φ - θ + k)/d` on `I₂`.
///
/// Points of `Λ₁ ∩ Λ₂` have multiplicity 2. With a rational length tag the
/// length part of the coincidence test is done in integer arithmetic.
pub fn closed_form_w1(p: &BoundaryParams, d: &IntervalPair, lo: f64, hi: f64) -> Result<SpectrumSlice> {
    if p.regime() != Regime::Decoupled {
        return Err(Error::WrongRegime { w: p.w, route: "solve_branch or closed_form_w0" });
    }
    check_window(lo, hi)?;
    let len = d.length();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut entries = Vec::new();
    let mut shared = HashSet::new();

    let m_lo = (lo + p.phi).ceil() as i64;
    let m_hi = (hi + p.phi).floor() as i64;
    for m in m_lo..=m_hi {
        let lambda = m as f64 - p.phi;
        if lambda < lo || lambda > hi {
            continue;
        }
        // X = θ - φ + dλ; coincident iff X ∈ ℤ
        let x = p.theta - p.phi + len * lambda;
        let (k, dist) = match d.length {
            LengthTag::Rational(r) => {
                let (num, den) = (*r.numer() as i128, *r.denom() as i128);
                let c = p.theta - p.phi - len * p.phi;
                let rem = (num * m as i128).rem_euclid(den);
                let whole = (num * m as i128).div_euclid(den);
                let (k0, dist) = near_integer(c + rem as f64 / den as f64);
                (k0 + whole.to_i64().unwrap_or(i64::MAX), dist)
            }
            _ => near_integer(x),
        };
        let (n, mult, b) = if dist < COINCIDENCE_TOL {
            shared.insert(k);
            (m + k, 2, one)
        } else {
            (m + x.ceil() as i64, 1, zero)
        };
        entries.push(EigenvalueEntry {
            n,
            lambda,
            multiplicity: mult,
            a: one,
            b,
            residual: master_residual(p, d, lambda).norm(),
        });
    }

    let k_lo = (lo * len - p.phi + p.theta).ceil() as i64;
    let k_hi = (hi * len - p.phi + p.theta).floor() as i64;
    for k in k_lo..=k_hi {
        if shared.contains(&k) {
            continue;
        }
        let lambda = (p.phi - p.theta + k as f64) / len;
        if lambda < lo || lambda > hi {
            continue;
        }
        entries.push(EigenvalueEntry {
            n: k + (p.phi + lambda).floor() as i64 + 1,
            lambda,
            multiplicity: 1,
            a: zero,
            b: one,
            residual: master_residual(p, d, lambda).norm(),
        });
    }
    entries.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    Ok(SpectrumSlice {
        entries,
        window: (lo, hi),
        structure: SpectrumStructure::LatticeUnion,
    })
}

/// All eigenvalues in `[lo, hi]`, routed by regime.
pub fn spectrum_window(p: &BoundaryParams, d: &IntervalPair, lo: f64, hi: f64) -> Result<SpectrumSlice> {
    check_window(lo, hi)?;
    match p.regime() {
        Regime::Exchange => closed_form_w0(p, d, lo, hi),
        Regime::Decoupled => closed_form_w1(p, d, lo, hi),
        Regime::Mixed => {
            let l = d.total_length();
            let first = (lo * l + p.theta).floor() as i64;
            let last = (hi * l + p.theta + 1.0).ceil() as i64;
            let mut entries = Vec::new();
            for n in first..=last {
                let x = solve_branch(p, d, n)?;
                if x.lambda >= lo && x.lambda <= hi {
                    entries.push(x);
                }
            }
            Ok(SpectrumSlice {
                entries,
                window: (lo, hi),
                structure: mixed_structure(d),
            })
        }
    }
}

/// Entries whose branch indices meet `first..=last`, routed by regime.
pub fn spectrum_branches(p: &BoundaryParams, d: &IntervalPair, first: i64, last: i64) -> Result<SpectrumSlice> {
    if first > last {
        return Err(Error::invalid("branches", format!("empty range {first}..{last}")));
    }
    let (lo, _) = branch_bracket(p, d, first);
    let (_, hi) = branch_bracket(p, d, last);
    let (entries, structure) = match p.regime() {
        Regime::Exchange => (
            (first..=last).map(|n| w0_entry(p, d, n)).collect(),
            SpectrumStructure::SingleLattice,
        ),
        Regime::Mixed => (
            (first..=last).map(|n| solve_branch(p, d, n)).collect::<Result<Vec<_>>>()?,
            mixed_structure(d),
        ),
        Regime::Decoupled => {
            let all = closed_form_w1(p, d, lo - 1e-6, hi + 1e-6)?;
            let entries = all
                .entries
                .into_iter()
                .filter(|x| *x.indices().start() <= last && *x.indices().end() >= first)
                .collect();
            (entries, SpectrumStructure::LatticeUnion)
        }
    };
    let window = match (entries.first(), entries.last()) {
        (Some(a), Some(b)) => (a.lambda, b.lambda),
        _ => (lo, hi),
    };
    Ok(SpectrumSlice {
        entries,
        window,
        structure,
    })
}

/// Largest `δ` with `|⟨e_t|1⟩| > L/2` for all `|t| < δ`.
///
/// Marches from `t = 0` with steps `(|m(t)| - L/2)/K`, where
/// `K = π(1 + β² - α²)` bounds `|m'|`, so no crossing can be skipped.
pub fn separation_delta(d: &IntervalPair) -> f64 {
    let l = d.total_length();
    let lip = std::f64::consts::PI * (1.0 + d.beta * d.beta - d.alpha * d.alpha);
    let target = 0.5 * l;
    let mut t = 0.0;
    for _ in 0..1_000_000 {
        let v = exp_moment(t, d).norm() - target;
        if v <= 1e-13 * l {
            break;
        }
        t += v / lip;
    }
    t
}

/// Lower bound on gaps between distinct eigenvalues of this particular `P_B`.
///
/// Consecutive branches differ by one in `h`, and `h' <= d + (1+w)/(1-w)`.
/// At `w = 1` with irrational length the two lattices come arbitrarily close,
/// so no bound is returned.
pub fn separation_bound(p: &BoundaryParams, d: &IntervalPair) -> Option<f64> {
    match p.regime() {
        Regime::Exchange => Some(1.0 / d.total_length()),
        Regime::Mixed => Some(1.0 / (d.length() + (1.0 + p.w) / (1.0 - p.w))),
        Regime::Decoupled => None,
    }
}

/// Number of branch indices in `[λ_n, λ_n + 1)`: `⌈1 + d⌉`.
pub fn eigenvalue_window_count(d: &IntervalPair) -> usize {
    match d.length {
        LengthTag::Rational(r) => (r + 1).ceil().to_integer() as usize,
        _ => d.total_length().ceil() as usize,
    }
}

/// Range of counts over arbitrary windows `[t, t + 1)`: `⌊1 + d⌋` to `⌈1 + d⌉`.
pub fn unit_window_count_range(d: &IntervalPair) -> (usize, usize) {
    match d.length {
        LengthTag::Rational(r) => ((r + 1).floor().to_integer() as usize, (r + 1).ceil().to_integer() as usize),
        _ => (d.total_length().floor() as usize, d.total_length().ceil() as usize),
    }
}

/// Spectrum over one period for a rational length `p/q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDecomposition {
    /// `λ_0, …, λ_{p+q-1}`, all in `[λ_0, λ_0 + q)`.
    pub finite_set: Vec<EigenvalueEntry>,
    pub period: i64,
    /// Largest `|λ_{n+p+q} - λ_n - q|` over the sampled `n`.
    pub shift_residual: f64,
    pub sampled: Vec<i64>,
}

const SHIFT_SAMPLES: [i64; 10] = [-41, -17, -5, -1, 0, 2, 7, 13, 30, 77];

/// `Λ = F + qℤ` with `|F| = p + q` when `β - α = p/q`.
pub fn lattice_decomposition(p: &BoundaryParams, d: &IntervalPair) -> Result<LatticeDecomposition> {
    let r = d
        .rational_length()
        .ok_or_else(|| Error::Structural("lattice decomposition needs a rational length tag".into()))?;
    check_mixed(p)?;
    let (num, den) = (*r.numer(), *r.denom());
    let finite_set = (0..num + den).map(|n| solve_branch(p, d, n)).collect::<Result<Vec<_>>>()?;
    let mut shift_residual: f64 = 0.0;
    for &n in &SHIFT_SAMPLES {
        let a = solve_branch(p, d, n)?;
        let b = solve_branch(p, d, n + num + den)?;
        shift_residual = shift_residual.max((b.lambda - a.lambda - den as f64).abs());
    }
    if shift_residual > RESIDUAL_TOL {
        return Err(Error::Solver(format!("shift identity off by {shift_residual:e}")));
    }
    Ok(LatticeDecomposition {
        finite_set,
        period: den,
        shift_residual,
        sampled: SHIFT_SAMPLES.to_vec(),
    })
}

/// Fractional parts `[λ_n]` for `n = 0..count` on an irrational length.
pub fn fractional_orbit(p: &BoundaryParams, d: &IntervalPair, count: usize) -> Result<Vec<f64>> {
    if d.length != LengthTag::Irrational {
        return Err(Error::Structural("fractional orbit needs a length tagged irrational".into()));
    }
    check_mixed(p)?;
    (0..count as i64)
        .map(|n| solve_branch(p, d, n).map(|x| x.lambda.rem_euclid(1.0)))
        .collect()
}

/// Half the largest circular gap of a point set in `[0, 1)`.
pub fn covering_radius(points: &[f64]) -> f64 {
    if points.is_empty() {
        return 0.5;
    }
    let mut s: Vec<f64> = points.iter().map(|x| x.rem_euclid(1.0)).collect();
    s.sort_by(f64::total_cmp);
    let wrap = s[0] + 1.0 - s[s.len() - 1];
    let inner = s.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    0.5 * inner.max(wrap)
}

/// Bounds `λ₀ + (k-1)/L ± 1` for `λ_k` on an irrational length.
pub fn asymptotic_bounds(lambda0: f64, k: i64, d: &IntervalPair) -> (f64, f64) {
    let c = lambda0 + (k - 1) as f64 / d.total_length();
    (c - 1.0, c + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::lift_g;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(w: f64, phi: f64, psi: f64, theta: f64) -> BoundaryParams {
        BoundaryParams::new(w, phi, psi, theta).unwrap()
    }

    /// Roots of `Im q` with `Re q > 0`, where `q = e(θ-φ+dλ)·conj(M(e(φ+λ)))`.
    fn scan_roots(p: &BoundaryParams, d: &IntervalPair, lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let q = |l: f64| {
            let z = e(p.phi + l);
            let m = (z * p.w - 1.0) / (z - p.w);
            e(p.theta - p.phi + d.length() * l) * m.conj()
        };
        let mut roots = Vec::new();
        let n = ((hi - lo) / step).ceil() as usize;
        let mut a = lo;
        let mut qa = q(a);
        for i in 1..=n {
            let b = lo + i as f64 * step;
            let qb = q(b);
            if qa.im == 0.0 && qa.re > 0.0 {
                roots.push(a);
            } else if qa.im * qb.im < 0.0 && qa.re > 0.0 && qb.re > 0.0 {
                let (mut x, mut y) = (a, b);
                while y - x > 1e-12 {
                    let m = 0.5 * (x + y);
                    if q(m).im * q(x).im <= 0.0 {
                        y = m;
                    } else {
                        x = m;
                    }
                }
                roots.push(0.5 * (x + y));
            }
            a = b;
            qa = qb;
        }
        roots
    }

    #[test]
    fn residual_examples() {
        let d = IntervalPair::new(2.0, 3.0).unwrap();
        assert!(master_residual(&params(1.0, 0.0, 0.0, 0.0), &IntervalPair::new(2.0, 3.7).unwrap(), 0.0).norm() < 1e-15);
        assert!(master_residual(&params(0.0, 0.0, 0.0, 0.0), &d, 0.25).norm() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(master_residual(&params(s, -0.125, 0.125, -0.25), &d, 0.25).norm() < 1e-15);
    }

    #[test]
    fn h_examples() {
        let p = params(0.5, 0.0, 0.0, 0.0);
        let d = IntervalPair::new(2.0, 3.0).unwrap();
        assert_abs_diff_eq!(h_function(&p, &d, 0.0).unwrap(), 0.5, epsilon = 1e-15);
        for i in 0..50 {
            let t = -3.0 + 0.13 * i as f64;
            let jump = h_function(&p, &d, t + 1.0).unwrap() - h_function(&p, &d, t).unwrap();
            assert_abs_diff_eq!(jump, 2.0, epsilon = 1e-12);
        }
        let mut prev = h_function(&p, &d, -2.0).unwrap();
        for i in 1..=10_000 {
            let cur = h_function(&p, &d, -2.0 + 4.0 * i as f64 / 10_000.0).unwrap();
            assert!(cur > prev);
            prev = cur;
        }
        assert!(h_function(&params(0.0, 0.0, 0.0, 0.0), &d, 0.0).is_err());
    }

    #[test]
    fn first_branches_match_scan_oracle() {
        let p = params(0.5, 0.0, 0.0, 0.0);
        let d = IntervalPair::new(2.0, 3.0).unwrap();
        // h(0) = 1/2, so h = 0 is crossed left of the origin and h = 1 right of it
        let zero = solve_branch(&p, &d, 0).unwrap().lambda;
        assert!(zero > -0.5 && zero < 0.0);
        assert_abs_diff_eq!(zero - lift_g(0.5, zero).unwrap(), 0.0, epsilon = 1e-12);
        let roots = scan_roots(&p, &d, 0.0, 0.5, 1e-4);
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(solve_branch(&p, &d, 1).unwrap().lambda, roots[0], epsilon = 1e-10);
        let roots = scan_roots(&p, &d, -0.5, 0.0, 1e-4);
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(zero, roots[0], epsilon = 1e-10);
    }

    #[test]
    fn theta_half_gives_half_integers() {
        let d = IntervalPair::new(2.0, 3.0).unwrap();
        for w in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let s = spectrum_window(&params(w, 0.0, 0.0, 0.5), &d, -3.0, 3.0).unwrap();
            let lam = s.lambdas();
            assert_eq!(s.count_in(-3.0, 3.0 + 1e-9), 13, "w = {w}");
            for l in lam {
                assert!((2.0 * l - (2.0 * l).round()).abs() < 1e-9, "w = {w}, λ = {l}");
            }
        }
    }

    #[test]
    fn closed_forms() {
        let d = IntervalPair::new(2.0, 3.0).unwrap();
        let s = closed_form_w0(&params(0.0, 0.0, 0.0, 0.0), &d, -2.0, 2.0).unwrap();
        for x in &s.entries {
            assert!(((x.lambda - 0.25) * 2.0 - ((x.lambda - 0.25) * 2.0).round()).abs() < 1e-12);
            assert!(x.residual < 1e-12);
        }
        let d2 = IntervalPair::new(2.0, 4.0).unwrap();
        let s = closed_form_w0(&params(0.0, 0.0, 0.0, 0.0), &d2, -2.0, 2.0).unwrap();
        assert!(s.entries.iter().all(|x| ((x.lambda - 1.0 / 6.0) * 3.0 - ((x.lambda - 1.0 / 6.0) * 3.0).round()).abs() < 1e-12));

        let w1 = closed_form_w1(&params(1.0, 0.0, 0.0, 0.0), &d2, -2.0, 2.0).unwrap();
        for x in &w1.entries {
            let int = (x.lambda - x.lambda.round()).abs() < 1e-12;
            assert_eq!(x.multiplicity, if int { 2 } else { 1 });
        }
        let irr = IntervalPair::with_irrational_length(2.0, 2f64.sqrt()).unwrap();
        let w1 = closed_form_w1(&params(1.0, 0.0, 0.0, 0.0), &irr, -5.0, 5.0).unwrap();
        let doubles: Vec<_> = w1.entries.iter().filter(|x| x.multiplicity == 2).collect();
        assert_eq!(doubles.len(), 1);
        assert_eq!(doubles[0].lambda, 0.0);

        let phi = 0.17;
        let uniform = closed_form_w1(&params(1.0, phi, 0.0, 2.0 * phi), &d, -3.0, 3.0).unwrap();
        assert!(uniform.entries.iter().all(|x| x.multiplicity == 2));
        assert_eq!(uniform.len(), 6);

        assert!(closed_form_w0(&params(0.3, 0.0, 0.0, 0.0), &d, 0.0, 1.0).is_err());
        assert!(closed_form_w1(&params(0.3, 0.0, 0.0, 0.0), &d, 0.0, 1.0).is_err());
        assert!(solve_branch(&params(1.0, 0.0, 0.0, 0.0), &d, 0).is_err());
    }

    #[test]
    fn w1_indices_are_contiguous() {
        for (alpha, beta, phi, theta) in [(2.0, 4.0, 0.0, 0.0), (2.0, 3.5, 0.1, 0.3), (3.0, 3.0 + 2f64.sqrt(), -0.2, 0.45)] {
            let d = IntervalPair::new(alpha, beta).unwrap();
            let s = closed_form_w1(&params(1.0, phi, 0.0, theta), &d, -6.0, 6.0).unwrap();
            for pair in s.entries.windows(2) {
                assert_eq!(*pair[0].indices().end() + 1, pair[1].n, "{pair:?}");
            }
            let b = spectrum_branches(&params(1.0, phi, 0.0, theta), &d, -3, 3).unwrap();
            let covered: Vec<i64> = b.entries.iter().flat_map(|x| x.indices()).collect();
            assert!(covered.contains(&-3) && covered.contains(&3));
        }
    }

    #[test]
    fn w1_rational_coincidence_is_exact() {
        let d = IntervalPair::with_rational_length(2.0, 1, 3).unwrap();
        let s = closed_form_w1(&params(1.0, 0.0, 0.0, 0.0), &d, -4.0, 4.0).unwrap();
        for x in &s.entries {
            let expect = if (x.lambda / 3.0 - (x.lambda / 3.0).round()).abs() < 1e-12 { 2 } else { 1 };
            assert_eq!(x.multiplicity, expect, "λ = {}", x.lambda);
        }
        assert_eq!(s.count_in(0.0, 1.0), eigenvalue_window_count(&d));
    }

    #[test]
    fn separation_delta_matches_dense_scan() {
        let d = IntervalPair::new(2.0, 3.0).unwrap();
        let delta = separation_delta(&d);
        let l = d.total_length();
        let f = |t: f64| exp_moment(t, &d).norm() - 0.5 * l;
        let mut t = 0.0;
        while f(t + 1e-5) > 0.0 {
            t += 1e-5;
        }
        let (mut a, mut b) = (t, t + 1e-5);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if f(m) > 0.0 {
                a = m
            } else {
                b = m
            }
        }
        assert!(delta <= a + 1e-12);
        assert!(a - delta < 1e-9, "δ = {delta}, scan = {a}");
    }

    #[test]
    fn lattice_examples() {
        let p = params(0.6, 0.1, 0.2, 0.3);
        for (num, den) in [(1, 1), (2, 1), (3, 2)] {
            let d = IntervalPair::with_rational_length(2.0, num, den).unwrap();
            let dec = lattice_decomposition(&p, &d).unwrap();
            assert_eq!(dec.finite_set.len() as i64, num + den);
            assert_eq!(dec.period, den);
            let l0 = dec.finite_set[0].lambda;
            assert!(dec.finite_set.iter().all(|x| x.lambda >= l0 && x.lambda < l0 + den as f64));
        }
        let irr = IntervalPair::with_irrational_length(2.0, 2f64.sqrt()).unwrap();
        assert!(matches!(lattice_decomposition(&p, &irr), Err(Error::Structural(_))));
        let rat = IntervalPair::with_rational_length(2.0, 1, 1).unwrap();
        assert!(matches!(fractional_orbit(&p, &rat, 4), Err(Error::Structural(_))));
    }

    #[test]
    fn orbit_covering_shrinks() {
        let p = params(1.0 / 3f64.sqrt(), -0.125, 0.0, -0.25);
        let d = IntervalPair::with_irrational_length(3.0, 2f64.sqrt()).unwrap();
        let two = fractional_orbit(&p, &d, 2).unwrap();
        let sixteen = fractional_orbit(&p, &d, 16).unwrap();
        assert!(covering_radius(&sixteen) < covering_radius(&two));
    }

    #[test]
    fn window_counts() {
        for (alpha, beta) in [(2.0, 3.0), (2.0, 4.0), (2.0, 3.0 + 2f64.sqrt()), (1.0, 1.5)] {
            let d = IntervalPair::new(alpha, beta).unwrap();
            let p = params(0.4, 0.05, 0.0, 0.3);
            let s = spectrum_branches(&p, &d, -20, 20).unwrap();
            let c = eigenvalue_window_count(&d);
            for x in &s.entries[..20] {
                // λ_n + 1 can round onto the next branch when 1 + d is an integer
                assert_eq!(s.count_in(x.lambda, x.lambda + 1.0 - 1e-9), c);
            }
            let (lo, hi) = unit_window_count_range(&d);
            for i in 0..100 {
                let t = -5.0 + 0.0937 * i as f64;
                let k = s.count_in(t, t + 1.0);
                assert!(k >= lo && k <= hi);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn branches_match_scan(w in 0.05f64..0.95, phi in 0.0f64..1.0, theta in 0.0f64..1.0, alpha in 1.0f64..3.0, len in 0.2f64..2.5) {
            let p = params(w, phi, 0.0, theta);
            let d = IntervalPair::new(alpha, alpha + len).unwrap();
            let s = spectrum_window(&p, &d, -2.0, 2.0).unwrap();
            let scan = scan_roots(&p, &d, -2.0, 2.0, 1e-4);
            prop_assert_eq!(s.len(), scan.len());
            for (a, b) in s.lambdas().iter().zip(&scan) {
                prop_assert!((a - b).abs() < 1e-8);
            }
        }

        #[test]
        fn branches_increase_and_are_separated(w in 0.01f64..0.99, phi in -1.0f64..1.0, theta in -1.0f64..1.0, len in 0.1f64..3.0) {
            let p = params(w, phi, 0.0, theta);
            let d = IntervalPair::new(2.0, 2.0 + len).unwrap();
            let s = spectrum_branches(&p, &d, -15, 15).unwrap();
            let bound = separation_bound(&p, &d).unwrap();
            for pair in s.entries.windows(2) {
                prop_assert!(pair[1].lambda - pair[0].lambda > bound);
            }
        }

        #[test]
        fn psi_and_translation_independence(w in 0.05f64..0.95, psi in -1.0f64..1.0, c in 0.0f64..3.0) {
            let p = params(w, 0.1, 0.0, 0.2);
            let d = IntervalPair::new(2.0, 3.3).unwrap();
            let moved = d.translated(c).unwrap();
            let a = spectrum_branches(&p, &d, -5, 5).unwrap();
            let b = spectrum_branches(&p.with_psi(psi), &moved, -5, 5).unwrap();
            for (x, y) in a.entries.iter().zip(&b.entries) {
                prop_assert!((x.lambda - y.lambda).abs() < 1e-12);
            }
        }

        #[test]
        fn continuity_in_parameters(w in 0.05f64..0.95, phi in -0.5f64..0.5, theta in -0.5f64..0.5, n in -10i64..10) {
            let d = IntervalPair::new(2.0, 3.4).unwrap();
            let base = solve_branch(&params(w, phi, 0.0, theta), &d, n).unwrap().lambda;
            let h = 1e-4;
            for (dw, dp, dt, da) in [(h, 0.0, 0.0, 0.0), (0.0, h, 0.0, 0.0), (0.0, 0.0, h, 0.0), (0.0, 0.0, 0.0, h)] {
                let d2 = IntervalPair::new(2.0 + da, 3.4 + 2.0 * da).unwrap();
                let x = solve_branch(&params(w + dw, phi + dp, 0.0, theta + dt), &d2, n).unwrap().lambda;
                prop_assert!((x - base).abs() < 1e-3);
            }
        }

        #[test]
        fn eigenfunctions_satisfy_boundary_condition(w in 0.01f64..0.99, phi in -1.0f64..1.0, psi in -1.0f64..1.0, theta in -1.0f64..1.0, n in -20i64..20) {
            let p = params(w, phi, psi, theta);
            let d = IntervalPair::new(2.5, 3.9).unwrap();
            let x = solve_branch(&p, &d, n).unwrap();
            let u = PiecewiseExp::new(x.lambda, x.a, x.b);
            let b = p.boundary_matrix();
            let right = nalgebra::Vector2::new(u.eval(1.0, true), u.eval(d.beta, false));
            let left = nalgebra::Vector2::new(u.eval(0.0, true), u.eval(d.alpha, false));
            prop_assert!((b * right - left).norm() < 1e-10);
        }
    }

    #[test]
    fn limits_match_closed_forms() {
        let d = IntervalPair::new(2.0, 3.5).unwrap();
        let (phi, theta) = (0.1, 0.3);
        let w0 = spectrum_branches(&params(0.0, phi, 0.0, theta), &d, -6, 6).unwrap();
        let near0 = spectrum_branches(&params(1e-6, phi, 0.0, theta), &d, -6, 6).unwrap();
        for (a, b) in w0.entries.iter().zip(&near0.entries) {
            assert_eq!(a.n, b.n);
            assert!((a.lambda - b.lambda).abs() < 1e-4);
        }
        let w1 = spectrum_branches(&params(1.0, phi, 0.0, theta), &d, -6, 6).unwrap();
        let near1 = spectrum_branches(&params(1.0 - 1e-6, phi, 0.0, theta), &d, -6, 6).unwrap();
        for x in &w1.entries {
            for n in x.indices().filter(|n| (-6..=6).contains(n)) {
                let y = near1.entries.iter().find(|y| y.n == n).unwrap();
                assert!((x.lambda - y.lambda).abs() < 1e-4, "n = {n}: {} vs {}", x.lambda, y.lambda);
            }
        }
    }
}
