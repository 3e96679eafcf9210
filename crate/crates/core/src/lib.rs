//! Spectra of selfadjoint momentum operators on two intervals.
//!
//! The operator `P = (1/i2π) d/dx` on `Ω = [0,1] ∪ [α,β]` has a `U(2)` family of
//! selfadjoint extensions, indexed by a boundary matrix `B`. This crate
//! computes their spectra and eigenfunctions, decides when the eigenfunctions
//! are pure exponentials (spectral pairs), checks the tilings that go with
//! them, and simulates the unitary groups they generate.

pub mod domain;
pub mod error;
pub mod evolution;
pub mod moebius;
pub mod pairs;
pub mod quadrature;
pub mod spectrum;

pub use domain::{e, BoundaryParams, IntervalPair, LengthTag, Regime};
pub use error::{Error, Result};

