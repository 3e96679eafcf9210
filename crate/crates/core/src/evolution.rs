//! The unitary group generated by `P_B`, by eigenfunction expansion.
//!
//! A state is expanded in the eigenbasis `u_n = (a_n χ_{I₁} + b_n χ_{I₂}) e_{λ_n}`
//! and evolved by `c_n ↦ c_n e(-λ_n t)`. With this sign the group acts as
//! right translation `f(x) ↦ f(x - t)` inside each interval, and mass leaving
//! through `x = 1` re-enters at `0` and `α` with amplitudes `w e(φ)` and
//! `√(1-w²) e(ψ)`.

use std::sync::Arc;

use nalgebra::Vector2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{e, BoundaryParams, GridFunction, IntervalPair, PiecewiseExp, Regime};
use crate::error::{Error, Result};
use crate::spectrum::{spectrum_branches, COINCIDENCE_TOL};

/// Default truncation: branches `-128..=128`.
pub const DEFAULT_TRUNCATION: i64 = 128;

/// Default grid density.
pub const DEFAULT_POINTS_PER_UNIT: usize = 2048;

/// One eigenfunction of the basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub n: i64,
    pub u: PiecewiseExp,
    /// `⟨u, u⟩ = |a|² + |b|² (β - α)`.
    pub norm_sqr: f64,
}

/// Orthogonal eigenfunctions of one `P_B`, truncated to a branch range.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenbasis {
    params: BoundaryParams,
    geometry: IntervalPair,
    modes: Vec<Mode>,
}

fn needs_two_modes(p: &BoundaryParams, d: &IntervalPair, lambda: f64) -> bool {
    let near = |x: f64| (x - x.round()).abs() < COINCIDENCE_TOL;
    p.regime() == Regime::Decoupled && near(p.phi + lambda) && near(p.theta - p.phi + d.length() * lambda)
}

impl Eigenbasis {
    /// Basis from branches `first..=last`; double points contribute `(1,0)` and `(0,1)`.
    pub fn new(p: &BoundaryParams, d: &IntervalPair, first: i64, last: i64) -> Result<Self> {
        let slice = spectrum_branches(p, d, first, last)?;
        let modes = slice
            .entries
            .iter()
            .flat_map(|x| {
                x.eigenfunctions().into_iter().map(move |u| Mode {
                    n: x.n,
                    norm_sqr: u.norm_sqr(d),
                    u,
                })
            })
            .collect();
        Ok(Eigenbasis {
            params: *p,
            geometry: *d,
            modes,
        })
    }

    /// Symmetric truncation `-n..=n`.
    pub fn symmetric(p: &BoundaryParams, d: &IntervalPair, n: i64) -> Result<Self> {
        Eigenbasis::new(p, d, -n, n)
    }

    /// Basis from explicit modes. Double eigenvalues at `w = 1` must come with
    /// both coefficient vectors.
    pub fn from_modes(p: &BoundaryParams, d: &IntervalPair, modes: Vec<PiecewiseExp>) -> Result<Self> {
        let mut out: Vec<Mode> = Vec::with_capacity(modes.len());
        for (i, u) in modes.iter().enumerate() {
            if u.norm_sqr(d) == 0.0 {
                return Err(Error::invalid("modes", "zero eigenfunction"));
            }
            let same: Vec<&PiecewiseExp> = modes.iter().filter(|v| v.lambda == u.lambda).collect();
            if needs_two_modes(p, d, u.lambda) && same.len() < 2 {
                return Err(Error::invalid(
                    "modes",
                    format!("λ = {} has multiplicity 2 but only one basis vector", u.lambda),
                ));
            }
            out.push(Mode {
                n: i as i64,
                u: *u,
                norm_sqr: u.norm_sqr(d),
            });
        }
        Ok(Eigenbasis {
            params: *p,
            geometry: *d,
            modes: out,
        })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn params(&self) -> &BoundaryParams {
        &self.params
    }

    pub fn geometry(&self) -> &IntervalPair {
        &self.geometry
    }
}

/// A state as coefficients over a shared eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    basis: Arc<Eigenbasis>,
    pub coefficients: Vec<Complex64>,
    /// `‖f - Σ c_n u_n‖` for the state this was expanded from (0 for exact combinations).
    pub truncation_residual: f64,
    pub time: f64,
}

/// Either representation of a wave function.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveState {
    Grid(GridFunction),
    Coefficients(Expansion),
}

impl WaveState {
    pub fn norm(&self) -> f64 {
        match self {
            WaveState::Grid(g) => g.norm(),
            WaveState::Coefficients(c) => c.norm(),
        }
    }
}

/// Projects a sampled function onto the basis: `c_n = ⟨f, u_n⟩ / ⟨u_n, u_n⟩`.
pub fn expand(f: &GridFunction, basis: Arc<Eigenbasis>) -> Result<Expansion> {
    let d = basis.geometry;
    let g = f.geometry();
    if g.alpha != d.alpha || g.beta != d.beta {
        return Err(Error::DomainMismatch(format!("state on {g}, basis on {d}")));
    }
    let coefficients: Vec<Complex64> = basis.modes.iter().map(|m| f.inner_exp(&m.u) / m.norm_sqr).collect();
    let mut x = Expansion {
        basis,
        coefficients,
        truncation_residual: 0.0,
        time: 0.0,
    };
    x.truncation_residual = f.sub(&x.to_grid(f.points_per_unit()))?.norm();
    Ok(x)
}

/// `U(t)`: multiplies each coefficient by `e(-λ_n t)`.
pub fn evolve(state: &Expansion, t: f64) -> Expansion {
    Expansion {
        basis: state.basis.clone(),
        coefficients: state
            .coefficients
            .iter()
            .zip(&state.basis.modes)
            .map(|(c, m)| c * e(-m.u.lambda * t))
            .collect(),
        truncation_residual: state.truncation_residual,
        time: state.time + t,
    }
}

impl Expansion {
    /// Exact finite combination `Σ c_n u_n`.
    pub fn from_coefficients(basis: Arc<Eigenbasis>, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != basis.modes.len() {
            return Err(Error::invalid(
                "coefficients",
                format!("{} coefficients for {} modes", coefficients.len(), basis.modes.len()),
            ));
        }
        Ok(Expansion {
            basis,
            coefficients,
            truncation_residual: 0.0,
            time: 0.0,
        })
    }

    pub fn basis(&self) -> &Arc<Eigenbasis> {
        &self.basis
    }

    /// `‖Σ c_n u_n‖`, from coefficients.
    pub fn norm(&self) -> f64 {
        self.coefficients
            .iter()
            .zip(&self.basis.modes)
            .map(|(c, m)| c.norm_sqr() * m.norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    /// Value at `x`; `first` selects `I₁` (matters only at a shared endpoint).
    pub fn eval(&self, x: f64, first: bool) -> Complex64 {
        self.coefficients
            .iter()
            .zip(&self.basis.modes)
            .map(|(c, m)| c * m.u.eval(x, first))
            .sum()
    }

    pub fn to_grid(&self, points_per_unit: usize) -> GridFunction {
        let d = self.basis.geometry;
        let mut g = GridFunction::zeros(&d, points_per_unit);
        let nodes: Vec<(f64, bool)> = g.nodes().collect();
        for (v, (x, first)) in g.values_mut().zip(nodes) {
            *v = self.eval(x, first);
        }
        g
    }

    /// `‖B (f(1), f(β)) - (f(0), f(α))‖`.
    pub fn boundary_residual(&self) -> f64 {
        let d = self.basis.geometry;
        let b = self.basis.params.boundary_matrix();
        let right = Vector2::new(self.eval(1.0, true), self.eval(d.beta, false));
        let left = Vector2::new(self.eval(0.0, true), self.eval(d.alpha, false));
        (b * right - left).norm()
    }

    /// Largest `|c_n - e^{iγ} c'_n| ‖u_n‖` over a fitted global phase `e^{iγ}`.
    pub fn phase_distance(&self, other: &Expansion) -> (f64, Complex64) {
        let overlap: Complex64 = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .zip(&self.basis.modes)
            .map(|((a, b), m)| a * b.conj() * m.norm_sqr)
            .sum();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
        let dist = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .zip(&self.basis.modes)
            .map(|((a, b), m)| (a - phase * b).norm() * m.norm_sqr.sqrt())
            .fold(0.0, f64::max);
        (dist, phase)
    }
}

/// `‖(U(Δt)f - f)/Δt - (-i2π P_B f)‖`, in coefficient norm.
pub fn generator_defect(state: &Expansion, dt: f64) -> f64 {
    let i2pi = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    state
        .coefficients
        .iter()
        .zip(&state.basis.modes)
        .map(|(c, m)| {
            let l = m.u.lambda;
            let fd = (e(-l * dt) - 1.0) / dt;
            (c * (fd + i2pi * l)).norm_sqr() * m.norm_sqr
        })
        .sum::<f64>()
        .sqrt()
}

/// `max_t` of the boundary residual of `U(t) state`.
pub fn check_boundary_invariance(state: &Expansion, times: &[f64]) -> f64 {
    times
        .iter()
        .map(|&t| evolve(state, t).boundary_residual())
        .fold(state.boundary_residual(), f64::max)
}

/// Smooth compactly supported bump `exp(1 - 1/(1 - s²))`, `s = (x - center)/radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
}

impl Bump {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !center.is_finite() {
            return Err(Error::invalid("bump", format!("need radius > 0, got {radius}")));
        }
        Ok(Bump { center, radius })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.radius;
        if s.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    pub fn width(&self) -> f64 {
        2.0 * self.radius
    }

    /// Samples the bump on `I₁` (zero on `I₂`).
    pub fn on_grid(&self, d: &IntervalPair, points_per_unit: usize) -> GridFunction {
        let mut g = GridFunction::zeros(d, points_per_unit);
        let nodes: Vec<(f64, bool)> = g.nodes().collect();
        for (v, (x, first)) in g.values_mut().zip(nodes) {
            if first {
                *v = Complex64::new(self.eval(x), 0.0);
            }
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationReport {
    /// `‖U(t)Sf - f(· - t)‖` over `Ω`, `S` the truncated projection.
    pub deviation: f64,
    /// `max |U(t)Sf(x) - Sf(x - t)|` over `x ∈ [t, 1]`.
    pub drift: f64,
    pub truncation_residual: f64,
    pub passes: bool,
}

/// Expansion settings shared by the dynamical checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub truncation: i64,
    pub points_per_unit: usize,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            truncation: DEFAULT_TRUNCATION,
            points_per_unit: DEFAULT_POINTS_PER_UNIT,
        }
    }
}

/// `U(t)` moves a bump inside `I₁` to the right by `t`.
pub fn check_translation(
    p: &BoundaryParams,
    d: &IntervalPair,
    t: f64,
    bump: &Bump,
    cfg: ExpansionConfig,
) -> Result<TranslationReport> {
    let (lo, hi) = bump.support();
    if t < 0.0 || lo <= t || hi + t >= 1.0 - t {
        return Err(Error::Precondition(format!(
            "bump support [{lo}, {hi}] must stay more than t = {t} inside [0, 1] after the shift"
        )));
    }
    let basis = Arc::new(Eigenbasis::symmetric(p, d, cfg.truncation)?);
    let f = bump.on_grid(d, cfg.points_per_unit);
    let s = expand(&f, basis)?;
    let moved = evolve(&s, t);
    let shifted = Bump::new(bump.center + t, bump.radius)?.on_grid(d, cfg.points_per_unit);
    let deviation = moved.to_grid(cfg.points_per_unit).sub(&shifted)?.norm();
    let drift = f
        .nodes()
        .filter(|&(x, first)| first && x >= t)
        .step_by(16)
        .map(|(x, _)| (moved.eval(x, true) - s.eval(x - t, true)).norm())
        .fold(0.0, f64::max);
    Ok(TranslationReport {
        deviation,
        drift,
        truncation_residual: s.truncation_residual,
        passes: deviation <= 3.0 * s.truncation_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub total_mass: f64,
    pub mass_at_0: f64,
    pub mass_at_alpha: f64,
    /// `mass_at_0 / total_mass`, to compare with `w²`.
    pub fraction_at_0: f64,
    /// `mass_at_alpha / total_mass`, to compare with `1 - w²`.
    pub fraction_at_alpha: f64,
    /// Unit phase of the packet re-entering at `0`, to compare with `e(φ)`.
    pub phase_0: Option<Complex64>,
    /// Unit phase of the packet re-entering at `α`, to compare with `e(ψ)`.
    pub phase_alpha: Option<Complex64>,
    pub window: f64,
    pub truncation_residual: f64,
}

/// Sends a bump sitting just left of `x = 1` through the boundary.
///
/// Mass is measured on `[0, W]` and `[α, α + W]` with `W` the bump width plus `t`.
pub fn check_transition_probabilities(
    p: &BoundaryParams,
    d: &IntervalPair,
    bump: &Bump,
    t: f64,
    cfg: ExpansionConfig,
) -> Result<TransitionReport> {
    let (lo, hi) = bump.support();
    if lo <= 0.0 || hi > 1.0 {
        return Err(Error::Precondition(format!("bump support [{lo}, {hi}] must lie in (0, 1]")));
    }
    if lo + t <= 1.0 {
        return Err(Error::Precondition(format!(
            "t = {t} too short: the support must pass x = 1 completely"
        )));
    }
    let window = bump.width() + t;
    if window >= 1.0 || window > d.length() {
        return Err(Error::Precondition(format!(
            "measurement window {window} overlaps the far end of an interval"
        )));
    }
    let basis = Arc::new(Eigenbasis::symmetric(p, d, cfg.truncation)?);
    let f = bump.on_grid(d, cfg.points_per_unit);
    let s = expand(&f, basis)?;
    let g = evolve(&s, t).to_grid(cfg.points_per_unit);
    let total = f.norm().powi(2);
    let m0 = g.norm_on(0.0, window).powi(2);
    let ma = g.norm_on(d.alpha, d.alpha + window).powi(2);

    // re-entered packets are multiples of the bump shifted to 0 and to α
    let reference = |origin: f64| {
        let b = Bump::new(bump.center + t - 1.0 + origin, bump.radius).unwrap();
        let mut r = GridFunction::zeros(d, cfg.points_per_unit);
        let nodes: Vec<(f64, bool)> = r.nodes().collect();
        for (v, (x, first)) in r.values_mut().zip(nodes) {
            if first == (origin == 0.0) {
                *v = Complex64::new(b.eval(x), 0.0);
            }
        }
        r
    };
    let phase = |origin: f64, mass: f64| -> Result<Option<Complex64>> {
        if mass < 1e-6 * total {
            return Ok(None);
        }
        let z = g.inner(&reference(origin))?;
        Ok(Some(z / z.norm()))
    };
    Ok(TransitionReport {
        total_mass: total,
        mass_at_0: m0,
        mass_at_alpha: ma,
        fraction_at_0: m0 / total,
        fraction_at_alpha: ma / total,
        phase_0: phase(0.0, m0)?,
        phase_alpha: phase(d.alpha, ma)?,
        window,
        truncation_residual: s.truncation_residual,
    })
}
