//! Spectral pairs, spectral sets and tilings.
//!
//! `P_B` is a spectral operator when every eigenfunction has `a = b`, so the
//! eigenfunctions are plain exponentials and `(Ω, spectrum)` is a spectral
//! pair. The conditions for this are explicit in each regime; they are
//! reported one by one together with the residual of each test.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::domain::{exp_inner, ratio_f64, BoundaryParams, IntervalPair, Regime};
use crate::error::{Error, Result};
use crate::spectrum::spectrum_branches;

/// Tolerance for integrality and membership tests on floats.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Circle tolerance for polynomial roots.
pub const CIRCLE_TOL: f64 = 1e-8;

fn dist_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

fn dist_half_int(x: f64) -> f64 {
    0.5 * dist_int(2.0 * x)
}

/// One tested condition of a classification criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub id: String,
    pub satisfied: bool,
    /// Distance to the required set (0 when decided exactly).
    pub residual: f64,
    /// Decided in exact rational arithmetic.
    pub exact: bool,
}

impl Condition {
    fn float(id: &str, residual: f64) -> Self {
        Condition {
            id: id.to_string(),
            satisfied: residual < MEMBERSHIP_TOL,
            residual,
            exact: false,
        }
    }

    fn exact(id: &str, satisfied: bool, residual: f64) -> Self {
        Condition {
            id: id.to_string(),
            satisfied,
            residual,
            exact: true,
        }
    }
}

/// Closed form of the spectrum of a spectral operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SpectrumDescription {
    /// `offset + step·ℤ`.
    Lattice { offset: f64, step: f64 },
    /// `offsets + period·ℤ`, offsets in `[0, period)`.
    Cosets { offsets: Vec<f64>, period: f64 },
}

impl SpectrumDescription {
    /// Points in `[lo, hi]`, sorted.
    pub fn points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (offsets, step) = match self {
            SpectrumDescription::Lattice { offset, step } => (vec![*offset], *step),
            SpectrumDescription::Cosets { offsets, period } => (offsets.clone(), *period),
        };
        let mut out = Vec::new();
        for o in offsets {
            let first = ((lo - o) / step).ceil() as i64;
            let last = ((hi - o) / step).floor() as i64;
            out.extend((first..=last).map(|k| o + k as f64 * step));
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Outcome of [`classify_pair`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub is_spectral_operator: bool,
    pub regime: Regime,
    pub conditions: Vec<Condition>,
    pub spectrum: Option<SpectrumDescription>,
    /// `max |a_λ - b_λ|` over a block of computed eigenfunctions; an
    /// independent numerical check of the verdict.
    pub coefficient_residual: f64,
}

impl PairVerdict {
    pub fn failing(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.satisfied)
    }
}

fn exact_ratio(x: f64) -> Option<Ratio<i64>> {
    Ratio::approximate_float(x).filter(|r| ratio_f64(*r) == x)
}

/// `β/L` as an exact rational when the geometry has exact endpoints.
fn beta_over_length(d: &IntervalPair) -> (f64, Option<Ratio<i64>>) {
    let exact = d.exact_endpoints().map(|(a, b)| b / (b - a + 1));
    (d.beta / d.total_length(), exact)
}

fn integer_alpha(d: &IntervalPair) -> Condition {
    match d.exact_endpoints() {
        Some((a, _)) => Condition::exact(
            "alpha-integer-above-1",
            a.is_integer() && a > Ratio::from_integer(1),
            ratio_f64((a - a.round()).abs()),
        ),
        None => {
            let mut c = Condition::float("alpha-integer-above-1", dist_int(d.alpha));
            c.satisfied &= d.alpha.round() > 1.0;
            c
        }
    }
}

fn adjacent_unit(d: &IntervalPair) -> Condition {
    match (d.exact_endpoints(), d.rational_length()) {
        (_, Some(len)) => Condition::exact("beta-equals-alpha-plus-1", len.is_integer() && len == Ratio::from_integer(1), ratio_f64((len - 1).abs())),
        _ => Condition::float("beta-equals-alpha-plus-1", (d.beta - d.alpha - 1.0).abs()),
    }
}

/// `w` values for which the adjacent-unit geometry admits spectral operators.
pub fn spectral_w_set(alpha: i64) -> Vec<f64> {
    let mut ws: Vec<f64> = (0..2 * alpha)
        .map(|k| (2.0 * PI * (1 + 2 * k) as f64 / (4 * alpha) as f64).cos())
        .filter(|w| *w >= -MEMBERSHIP_TOL)
        .map(|w| w.max(0.0))
        .collect();
    ws.sort_by(f64::total_cmp);
    ws.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    ws
}

fn coefficient_residual(p: &BoundaryParams, d: &IntervalPair) -> f64 {
    let n = 2 * d.total_length().ceil() as i64 + 2;
    match spectrum_branches(p, d, -n, n) {
        Ok(s) => s
            .entries
            .iter()
            .flat_map(|x| x.modes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max),
        Err(_) => f64::NAN,
    }
}

/// Decides whether every eigenfunction of `P_B` is a pure exponential.
pub fn classify_pair(p: &BoundaryParams, d: &IntervalPair) -> PairVerdict {
    let regime = p.regime();
    let l = d.total_length();
    let mut conditions = Vec::new();
    let mut spectrum = None;
    match regime {
        Regime::Decoupled => {
            // eigenfunctions live on a single interval
            conditions.push(Condition::exact("coupled-intervals", false, 1.0 - p.w));
        }
        Regime::Exchange => {
            let (q, exact) = beta_over_length(d);
            conditions.push(match exact {
                Some(r) => Condition::exact(
                    "beta-over-length-natural",
                    r.is_integer() && r.is_positive(),
                    ratio_f64((r - r.round()).abs()),
                ),
                None => Condition::float("beta-over-length-natural", dist_int(q)),
            });
            conditions.push(Condition::float(
                "phase-integral",
                dist_int(-p.psi + (p.theta - 0.5) * (1.0 - d.alpha) / l),
            ));
            spectrum = Some(SpectrumDescription::Lattice {
                offset: (0.5 - p.theta) / l,
                step: 1.0 / l,
            });
        }
        Regime::Mixed => {
            let alpha = integer_alpha(d);
            let a = d.alpha.round().max(2.0) as i64;
            conditions.push(alpha);
            conditions.push(adjacent_unit(d));
            conditions.push(Condition::float("theta-minus-2phi-integral", dist_int(p.theta - 2.0 * p.phi)));
            conditions.push(Condition::float(
                "psi-plus-shifted-phi-half-integral",
                dist_half_int(p.psi + (a - 1) as f64 * p.phi),
            ));
            let wdist = spectral_w_set(a)
                .iter()
                .map(|w| (w - p.w).abs())
                .fold(f64::INFINITY, f64::min);
            conditions.push(Condition::float("w-in-cosine-set", wdist));
            let s = p.w.acos() / (2.0 * PI);
            // the two conditions above only fix ψ + (α-1)φ and αs modulo 1/2;
            // a = b on both cosets needs them to agree modulo 1
            conditions.push(Condition::float(
                "phase-parity",
                dist_int(a as f64 * s - 0.25 - p.psi - (a - 1) as f64 * p.phi),
            ));
            let mut offsets = vec![(-p.phi - s).rem_euclid(1.0), (-p.phi + s).rem_euclid(1.0)];
            offsets.sort_by(f64::total_cmp);
            spectrum = Some(SpectrumDescription::Cosets { offsets, period: 1.0 });
        }
    }
    let ok = conditions.iter().all(|c| c.satisfied);
    PairVerdict {
        is_spectral_operator: ok,
        regime,
        conditions,
        spectrum: if ok { spectrum } else { None },
        coefficient_residual: coefficient_residual(p, d),
    }
}

/// Which branch of the spectral-set criterion holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetReason {
    /// `β/L ∈ ℕ`; spectra exist for `w = 0`.
    BetaOverLengthIntegral,
    /// `α ∈ ℕ`, `α > 1`, `β = α + 1`; spectra exist for `0 < w < 1`.
    AdjacentUnit,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetVerdict {
    pub is_spectral_set: bool,
    pub reason: SetReason,
    pub conditions: Vec<Condition>,
}

/// `Ω` is spectral iff `β/L ∈ ℤ` or (`α ∈ ℤ`, `α > 1`, `β = α + 1`).
pub fn spectral_set_criterion(d: &IntervalPair) -> SetVerdict {
    let (q, exact) = beta_over_length(d);
    let first = match exact {
        Some(r) => Condition::exact("beta-over-length-integral", r.is_integer(), ratio_f64((r - r.round()).abs())),
        None => Condition::float("beta-over-length-integral", dist_int(q)),
    };
    let alpha = integer_alpha(d);
    let unit = adjacent_unit(d);
    let reason = if first.satisfied {
        SetReason::BetaOverLengthIntegral
    } else if alpha.satisfied && unit.satisfied {
        SetReason::AdjacentUnit
    } else {
        SetReason::Neither
    };
    SetVerdict {
        is_spectral_set: reason != SetReason::Neither,
        reason,
        conditions: vec![first, alpha, unit],
    }
}

/// A translation set `F + cℤ` with exact rational entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingSet {
    pub finite: Vec<Ratio<i64>>,
    pub period: Ratio<i64>,
}

impl TilingSet {
    pub fn lattice(c: i64) -> Self {
        TilingSet {
            finite: vec![Ratio::zero()],
            period: Ratio::from_integer(c),
        }
    }

    pub fn new(finite: Vec<i64>, period: i64) -> Self {
        TilingSet {
            finite: finite.into_iter().map(Ratio::from_integer).collect(),
            period: Ratio::from_integer(period),
        }
    }
}

/// The translation set paired with a spectral set.
///
/// `β/L ∈ ℕ` tiles with `Lℤ`; the adjacent-unit geometry `[0,1] ∪ [α, α+1]`
/// tiles with `{0, …, α-1} + 2αℤ`.
pub fn tiling_set_for(d: &IntervalPair) -> Option<TilingSet> {
    let v = spectral_set_criterion(d);
    match v.reason {
        SetReason::BetaOverLengthIntegral => {
            let l = match d.exact_endpoints() {
                Some((a, b)) => b - a + 1,
                None => exact_ratio(d.total_length())?,
            };
            Some(TilingSet {
                finite: vec![Ratio::zero()],
                period: l,
            })
        }
        SetReason::AdjacentUnit => {
            let a = d.alpha.round() as i64;
            Some(TilingSet::new((0..a).collect(), 2 * a))
        }
        SetReason::Neither => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingReport {
    pub tiles: bool,
    /// A point (rational, as a float) where the cover count is not 1.
    pub witness: Option<f64>,
    pub witness_count: Option<i64>,
    pub translates_checked: usize,
}

/// Checks `Σ_{a ∈ A} χ_Ω(t - a) = 1` on `[lo, hi]` away from endpoints, in exact arithmetic.
pub fn tiles_with(d: &IntervalPair, set: &TilingSet, lo: Ratio<i64>, hi: Ratio<i64>) -> Result<TilingReport> {
    if set.period <= Ratio::zero() || set.finite.is_empty() {
        return Err(Error::invalid("tiling", "need a positive period and a non-empty finite set"));
    }
    if hi <= lo {
        return Err(Error::invalid("window", "need lo < hi"));
    }
    let (alpha, beta) = match d.exact_endpoints() {
        Some(e) => e,
        None => (
            exact_ratio(d.alpha).ok_or_else(|| Error::invalid("alpha", "not representable as a rational"))?,
            exact_ratio(d.beta).ok_or_else(|| Error::invalid("beta", "not representable as a rational"))?,
        ),
    };
    let pieces = [(Ratio::zero(), Ratio::from_integer(1)), (alpha, beta)];
    let fmin = set.finite.iter().min().copied().unwrap_or_else(Ratio::zero);
    let fmax = set.finite.iter().max().copied().unwrap_or_else(Ratio::zero);
    let j_lo = ((lo - beta - fmax) / set.period).floor().to_integer() - 1;
    let j_hi = ((hi - fmin) / set.period).ceil().to_integer() + 1;

    let mut events: Vec<(Ratio<i64>, i64)> = Vec::new();
    let mut translates = 0;
    for j in j_lo..=j_hi {
        for f in &set.finite {
            let shift = *f + set.period * j;
            translates += 1;
            for (a, b) in pieces {
                events.push((a + shift, 1));
                events.push((b + shift, -1));
            }
        }
    }
    events.sort();
    let mut count = 0;
    let mut i = 0;
    let mut witness = None;
    // coverage on each open segment between consecutive distinct event points
    while i < events.len() {
        let x = events[i].0;
        while i < events.len() && events[i].0 == x {
            count += events[i].1;
            i += 1;
        }
        if i == events.len() {
            break;
        }
        let next = events[i].0;
        let (seg_lo, seg_hi) = (x.max(lo), next.min(hi));
        if seg_lo < seg_hi && count != 1 {
            witness = Some(((seg_lo + seg_hi) / 2, count));
            break;
        }
    }
    // the window must be covered by the event range
    if witness.is_none() {
        let first = events.first().map(|e| e.0).unwrap_or(hi);
        let last = events.last().map(|e| e.0).unwrap_or(lo);
        if first > lo {
            witness = Some((lo, 0));
        } else if last < hi {
            witness = Some((hi, 0));
        }
    }
    Ok(TilingReport {
        tiles: witness.is_none(),
        witness: witness.map(|(x, _)| ratio_f64(x)),
        witness_count: witness.map(|(_, c)| c),
        translates_checked: translates,
    })
}

/// Integer polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPolynomial {
    pub coefficients: Vec<i64>,
    /// Arguments (cycles, `[0,1)`) of the unimodular roots.
    pub roots_on_circle: Vec<f64>,
}

impl CharPolynomial {
    pub fn from_coefficients(mut coefficients: Vec<i64>) -> Result<Self> {
        while coefficients.last() == Some(&0) {
            coefficients.pop();
        }
        if coefficients.len() < 2 {
            return Err(Error::invalid("coefficients", "polynomial must have degree >= 1"));
        }
        let mut p = CharPolynomial {
            coefficients,
            roots_on_circle: Vec::new(),
        };
        p.roots_on_circle = roots_on_unit_circle(&p);
        Ok(p)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, &c| acc * z + c as f64)
    }

    fn eval_derivative(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::zero(), |acc, (k, &c)| acc * z + (k as f64 * c as f64))
    }

    /// Product with another integer polynomial.
    pub fn mul(&self, other: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.coefficients.len() + other.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    }

    /// All complex roots: companion-matrix eigenvalues, one Newton step each.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        let lead = *self.coefficients.last().unwrap() as f64;
        let mut c = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            c[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            c[(i, n - 1)] = -(self.coefficients[i] as f64) / lead;
        }
        c.complex_eigenvalues()
            .iter()
            .map(|&z| {
                let dp = self.eval_derivative(z);
                if dp.norm() > 1e-8 {
                    z - self.eval(z) / dp
                } else {
                    z
                }
            })
            .collect()
    }
}

/// `(z-1)(1 + z^α(1 + … + z^{β-α-1})) = -1 + z - z^α + z^β` for integer `1 < α < β`.
pub fn build_char_polynomial(d: &IntervalPair) -> Result<CharPolynomial> {
    let (a, b) = match d.exact_endpoints() {
        Some((a, b)) if a.is_integer() && b.is_integer() => (a.to_integer(), b.to_integer()),
        Some(_) => return Err(Error::invalid("alpha", "endpoints must be integers")),
        None if dist_int(d.alpha) == 0.0 && dist_int(d.beta) == 0.0 => (d.alpha as i64, d.beta as i64),
        None => return Err(Error::invalid("alpha", format!("endpoints must be integers, got {d}"))),
    };
    if a <= 1 || b <= a {
        return Err(Error::invalid("alpha", format!("need 1 < alpha < beta, got {a}, {b}")));
    }
    let mut c = vec![0i64; b as usize + 1];
    c[0] -= 1;
    c[1] += 1;
    c[a as usize] -= 1;
    c[b as usize] += 1;
    CharPolynomial::from_coefficients(c)
}

/// Arguments in cycles of roots with `||z| - 1| < 1e-8`, sorted.
pub fn roots_on_unit_circle(poly: &CharPolynomial) -> Vec<f64> {
    let mut out: Vec<f64> = poly
        .roots()
        .into_iter()
        .filter(|z| (z.norm() - 1.0).abs() < CIRCLE_TOL)
        .map(|z| {
            let c = (z.arg() / (2.0 * PI)).rem_euclid(1.0);
            if c > 1.0 - 1e-12 { 0.0 } else { c }
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// `G_{jk} = ⟨e_{λ_j} | e_{λ_k}⟩` over `Ω`.
pub fn gram_matrix(lambdas: &[f64], d: &IntervalPair) -> DMatrix<Complex64> {
    DMatrix::from_fn(lambdas.len(), lambdas.len(), |j, k| exp_inner(lambdas[j], lambdas[k], d))
}

/// Largest off-diagonal modulus of a Gram matrix.
pub fn max_off_diagonal(g: &DMatrix<Complex64>) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..g.nrows() {
        for k in 0..g.ncols() {
            if j != k {
                m = m.max(g[(j, k)].norm());
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{e, exp_moment};
    use crate::spectrum::closed_form_w0;
    use proptest::prelude::*;

    fn standard() -> BoundaryParams {
        BoundaryParams::new(std::f64::consts::FRAC_1_SQRT_2, -0.125, 0.125, -0.25).unwrap()
    }

    fn r(p: i64, q: i64) -> Ratio<i64> {
        Ratio::new(p, q)
    }

    #[test]
    fn classify_examples() {
        let v = classify_pair(&standard(), &IntervalPair::integers(2, 3).unwrap());
        assert!(v.is_spectral_operator, "{v:?}");
        assert!(v.coefficient_residual < 1e-9);
        assert_eq!(v.spectrum, Some(SpectrumDescription::Cosets { offsets: vec![0.0, 0.25], period: 1.0 }));
        let pts = v.spectrum.unwrap().points(-1.0, 1.0);
        let want = [-1.0, -0.75, 0.0, 0.25, 1.0];
        assert_eq!(pts.len(), want.len());
        for (a, b) in pts.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }

        let v = classify_pair(&standard(), &IntervalPair::integers(2, 4).unwrap());
        assert!(!v.is_spectral_operator);
        assert!(v.failing().any(|c| c.id == "beta-equals-alpha-plus-1"));
        assert!(v.coefficient_residual > 0.1);

        let v = classify_pair(&standard(), &IntervalPair::integers(3, 4).unwrap());
        assert!(!v.is_spectral_operator);
        assert!(v.coefficient_residual > 0.1);

        let v = classify_pair(&BoundaryParams::new(1.0, 0.0, 0.0, 0.0).unwrap(), &IntervalPair::integers(2, 3).unwrap());
        assert!(!v.is_spectral_operator);
    }

    #[test]
    fn w0_verdict_matches_closed_form() {
        // [0,1] ∪ [5/2, 3]: β/L = 2
        let d = IntervalPair::exact(r(5, 2), r(3, 1)).unwrap();
        let l = d.total_length();
        for theta in [0.0, 0.2, 0.5] {
            let psi = (theta - 0.5) * (1.0 - d.alpha) / l;
            let p = BoundaryParams::new(0.0, 0.3, psi, theta).unwrap();
            let v = classify_pair(&p, &d);
            assert!(v.is_spectral_operator, "{v:?}");
            assert!(v.coefficient_residual < 1e-9);
            let pts = v.spectrum.unwrap().points(-3.0, 3.0);
            let cf = closed_form_w0(&p, &d, -3.0, 3.0).unwrap().lambdas();
            assert_eq!(pts.len(), cf.len());
            for (a, b) in pts.iter().zip(&cf) {
                assert!((a - b).abs() < 1e-12);
            }
            let off = BoundaryParams::new(0.0, 0.3, psi + 0.1, theta).unwrap();
            let v = classify_pair(&off, &d);
            assert!(!v.is_spectral_operator);
            assert!(v.coefficient_residual > 1e-3);
        }
    }

    #[test]
    fn set_criterion_examples() {
        assert_eq!(spectral_set_criterion(&IntervalPair::exact(r(5, 2), r(3, 1)).unwrap()).reason, SetReason::BetaOverLengthIntegral);
        assert_eq!(spectral_set_criterion(&IntervalPair::new(2.5, 3.0).unwrap()).reason, SetReason::BetaOverLengthIntegral);
        assert_eq!(spectral_set_criterion(&IntervalPair::integers(2, 3).unwrap()).reason, SetReason::AdjacentUnit);
        assert!(!spectral_set_criterion(&IntervalPair::integers(2, 4).unwrap()).is_spectral_set);
        assert!(!spectral_set_criterion(&IntervalPair::new(2.0, 4.0).unwrap()).is_spectral_set);
    }

    #[test]
    fn tiling_examples() {
        let check = |d: IntervalPair, set: TilingSet, lo: i64, hi: i64| {
            tiles_with(&d, &set, Ratio::from_integer(lo), Ratio::from_integer(hi)).unwrap()
        };
        assert!(check(IntervalPair::integers(4, 6).unwrap(), TilingSet::lattice(3), -6, 9).tiles);
        assert!(check(IntervalPair::integers(5, 8).unwrap(), TilingSet::lattice(4), -8, 12).tiles);
        assert!(check(IntervalPair::integers(2, 3).unwrap(), TilingSet::new(vec![0, 1], 4), -8, 12).tiles);
        let bad = check(IntervalPair::integers(2, 4).unwrap(), TilingSet::lattice(3), -6, 9);
        assert!(!bad.tiles);
        assert!(bad.witness.is_some());
        let overlap = check(IntervalPair::integers(2, 3).unwrap(), TilingSet::new(vec![0, 2], 4), 0, 8);
        assert_eq!(overlap.witness_count, Some(2));
        assert!(tiling_set_for(&IntervalPair::integers(2, 4).unwrap()).is_none());
    }

    #[test]
    fn spectral_sets_tile() {
        for d in [
            IntervalPair::integers(2, 3).unwrap(),
            IntervalPair::integers(3, 4).unwrap(),
            IntervalPair::integers(4, 6).unwrap(),
            IntervalPair::integers(5, 8).unwrap(),
            IntervalPair::exact(r(5, 2), r(3, 1)).unwrap(),
            IntervalPair::exact(r(7, 3), r(8, 3)).unwrap(),
        ] {
            let set = tiling_set_for(&d).unwrap();
            let c = set.period;
            assert!(tiles_with(&d, &set, -c, c * 2).unwrap().tiles, "{d}");
        }
    }

    #[test]
    fn polynomial_examples() {
        let p = build_char_polynomial(&IntervalPair::integers(2, 3).unwrap()).unwrap();
        assert_eq!(p.coefficients, vec![-1, 1, -1, 1]);
        assert_eq!(p.coefficients, CharPolynomial::from_coefficients(vec![-1, 1]).unwrap().mul(&[1, 0, 1]));
        let p = build_char_polynomial(&IntervalPair::integers(2, 5).unwrap()).unwrap();
        assert_eq!(p.coefficients, CharPolynomial::from_coefficients(vec![-1, 1]).unwrap().mul(&[1, 0, 1, 1, 1]));
        let p = build_char_polynomial(&IntervalPair::integers(3, 5).unwrap()).unwrap();
        assert_eq!(p.coefficients, CharPolynomial::from_coefficients(vec![-1, 1]).unwrap().mul(&[1, 0, 0, 1, 1]));
        assert!(build_char_polynomial(&IntervalPair::new(2.5, 3.0).unwrap()).is_err());

        let a = CharPolynomial::from_coefficients(vec![-1, 1, -1, 1]).unwrap();
        assert_eq!(a.roots_on_circle.len(), 3);
        for (x, y) in a.roots_on_circle.iter().zip([0.0, 0.25, 0.75]) {
            assert!((x - y).abs() < 1e-10);
        }
        let b = CharPolynomial::from_coefficients(CharPolynomial::from_coefficients(vec![-1, 1]).unwrap().mul(&[1, 0, 0, 1])).unwrap();
        assert_eq!(b.roots_on_circle.len(), 4);
        for (x, y) in b.roots_on_circle.iter().zip([0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0]) {
            assert!((x - y).abs() < 1e-10);
        }
        let c = build_char_polynomial(&IntervalPair::integers(2, 4).unwrap()).unwrap();
        assert_eq!(c.roots_on_circle, vec![0.0]);
        // cubic factor 1 + z² + z³: moduli are not 1
        let cubic = CharPolynomial::from_coefficients(vec![1, 0, 1, 1]).unwrap();
        let roots = cubic.roots();
        assert_eq!(roots.len(), 3);
        assert!(roots.iter().all(|z| (z.norm() - 1.0).abs() > 0.1));
        assert!(roots.iter().all(|z| cubic.eval(*z).norm() < 1e-12));
    }

    #[test]
    fn gram_examples() {
        let d = IntervalPair::integers(2, 3).unwrap();
        let g = gram_matrix(&[0.0, 0.25, 1.0, 1.25], &d);
        assert!(max_off_diagonal(&g) < 1e-10);
        for i in 0..4 {
            assert!((g[(i, i)] - 2.0).norm() < 1e-14);
        }
        assert!(max_off_diagonal(&gram_matrix(&[0.0, 0.3], &d)) > 0.1);
        let one = gram_matrix(&[0.7], &d);
        assert_eq!(one.shape(), (1, 1));
        assert!((one[(0, 0)] - 2.0).norm() < 1e-14);
    }

    #[test]
    fn parity_condition_is_needed() {
        // α = 4, w = cos(3π/8), ψ + 3φ = 0 passes every other condition
        let w = (3.0 * PI / 8.0).cos();
        let p = BoundaryParams::new(w, 0.0, 0.0, 0.0).unwrap();
        let d = IntervalPair::integers(4, 5).unwrap();
        let v = classify_pair(&p, &d);
        assert_eq!(v.failing().map(|c| c.id.as_str()).collect::<Vec<_>>(), vec!["phase-parity"]);
        assert!(v.coefficient_residual > 1.0);
        let v = classify_pair(&p.with_psi(0.5), &d);
        assert!(v.is_spectral_operator);
        assert!(v.coefficient_residual < 1e-9);
    }

    #[test]
    fn w_set_is_one_period() {
        assert_eq!(spectral_w_set(2).len(), 1);
        assert!((spectral_w_set(2)[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let w3 = spectral_w_set(3);
        assert_eq!(w3.len(), 2);
        assert!(w3[0].abs() < 1e-12 && (w3[1] - 0.75f64.sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn polynomial_zero_iff_moment_zero(alpha in 2i64..6, len in 1i64..4, k in 0usize..200, lam in -3.0f64..3.0, pick in proptest::bool::ANY) {
            let d = IntervalPair::integers(alpha, alpha + len).unwrap();
            let p = build_char_polynomial(&d).unwrap();
            let t = if pick && !p.roots_on_circle.is_empty() {
                let a = p.roots_on_circle[k % p.roots_on_circle.len()];
                a + (k as f64 / 50.0).floor()
            } else {
                lam
            };
            prop_assume!(t.abs() > 1e-6);
            let pz = p.eval(e(t)).norm();
            let m = exp_moment(t, &d).norm();
            // ⟨e_t|1⟩ = p(e(t)) / (i2πt)
            prop_assert_eq!(pz < 1e-9, m * 2.0 * PI * t.abs() < 1e-9);
        }

        #[test]
        fn spectral_verdict_implies_orthogonality(k in 0i64..8, alpha in 2i64..6, phi in -1.0f64..1.0, j in -3i64..3, half in 0i64..2) {
            let a = alpha;
            let ws = spectral_w_set(a);
            let w = ws[(k as usize) % ws.len()];
            prop_assume!(w > 1e-6 && w < 1.0 - 1e-6);
            let theta = 2.0 * phi + j as f64;
            let s = w.acos() / (2.0 * PI);
            let psi = a as f64 * s - 0.25 - (a - 1) as f64 * phi + half as f64;
            let p = BoundaryParams::new(w, phi, psi, theta).unwrap();
            let d = IntervalPair::integers(a, a + 1).unwrap();
            let v = classify_pair(&p, &d);
            prop_assert!(v.is_spectral_operator);
            prop_assert!(v.coefficient_residual < 1e-9);
            let pts: Vec<f64> = v.spectrum.unwrap().points(-6.0, 6.0).into_iter().take(20).collect();
            prop_assert_eq!(pts.len(), 20);
            prop_assert!(max_off_diagonal(&gram_matrix(&pts, &d)) < 1e-9);
        }
    }
}
