use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde::Serialize;

use twoint::{BoundaryParams, IntervalPair};

/// Spectra, spectral pairs and dynamics of momentum operators on two intervals.
#[derive(Debug, Parser)]
#[command(name = "twoint", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues and eigenfunction coefficients.
    Spectrum(SpectrumArgs),
    /// Spectral-operator and spectral-set verdicts.
    Classify(ClassifyArgs),
    /// Plot data: h-curves, eigenvalue traces in w, fractional orbits.
    Curves(CurvesArgs),
    /// Time evolution of a wave packet.
    Evolve(EvolveArgs),
}

/// A real number given as a literal or an expression such as `sqrt(2)/2`.
///
/// Decimal and `p/q` literals also keep their exact rational value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Number {
    pub value: f64,
    pub exact: Option<Ratio<i64>>,
}

fn exact_literal(s: &str) -> Option<Ratio<i64>> {
    let s = s.trim();
    if s.contains('/') {
        return twoint::domain::parse_ratio(s).ok();
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: i64 = digits.parse().ok()?;
    let den = 10i64.checked_pow(frac.len() as u32)?;
    let r = Ratio::new(num, den);
    Some(if neg { -r } else { r })
}

pub fn parse_number(s: &str) -> Result<Number, String> {
    let exact = exact_literal(s);
    let value = match exact {
        Some(r) => *r.numer() as f64 / *r.denom() as f64,
        None => meval::eval_str(s).map_err(|e| format!("cannot evaluate `{s}`: {e}"))?,
    };
    if !value.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(Number { value, exact })
}

/// An inclusive integer range `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexRange {
    pub first: i64,
    pub last: i64,
}

pub fn parse_index_range(s: &str) -> Result<IndexRange, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected `a..b`, got `{s}`"))?;
    let first = a.trim().parse().map_err(|_| format!("bad range start `{a}`"))?;
    let last = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad range end `{b}`"))?;
    if first > last {
        return Err(format!("empty range `{s}`"));
    }
    Ok(IndexRange { first, last })
}

/// A closed real interval `lo..hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

pub fn parse_window(s: &str) -> Result<Window, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected `lo..hi`, got `{s}`"))?;
    let lo = parse_number(a)?.value;
    let hi = parse_number(b)?.value;
    if !(lo < hi) {
        return Err(format!("empty window `{s}`"));
    }
    Ok(Window { lo, hi })
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    parse_number(s).map(|n| n.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

/// Boundary data, geometry and output options shared by all subcommands.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Coupling `0 <= w <= 1`.
    #[arg(long, default_value = "0", value_parser = parse_number, allow_hyphen_values = true)]
    pub w: Number,
    /// Phase φ in cycles.
    #[arg(long, default_value = "0", value_parser = parse_number, allow_hyphen_values = true)]
    pub phi: Number,
    /// Phase ψ in cycles.
    #[arg(long, default_value = "0", value_parser = parse_number, allow_hyphen_values = true)]
    pub psi: Number,
    /// Phase θ in cycles.
    #[arg(long, default_value = "0", value_parser = parse_number, allow_hyphen_values = true)]
    pub theta: Number,
    /// Left end of the second interval.
    #[arg(long, default_value = "2", value_parser = parse_number, allow_hyphen_values = true)]
    pub alpha: Number,
    /// Right end of the second interval.
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true, conflicts_with_all = ["length_rational", "length_irrational"])]
    pub beta: Option<Number>,
    /// Exact length `β - α = p/q`.
    #[arg(long, value_parser = twoint::domain::parse_ratio, conflicts_with = "length_irrational")]
    pub length_rational: Option<Ratio<i64>>,
    /// Length `β - α`, declared irrational.
    #[arg(long, value_parser = parse_number)]
    pub length_irrational: Option<Number>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Residual tolerance for accepting computed eigenvalues.
    #[arg(long, default_value = "1e-9", value_parser = parse_number)]
    pub tol: Number,
    /// Output path (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized initial states.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Common {
    pub fn params(&self) -> twoint::Result<BoundaryParams> {
        BoundaryParams::new(self.w.value, self.phi.value, self.psi.value, self.theta.value)
    }

    pub fn geometry(&self) -> twoint::Result<IntervalPair> {
        let a = self.alpha;
        if let Some(len) = self.length_rational {
            return match a.exact {
                Some(ea) => IntervalPair::exact(ea, ea + len),
                None => IntervalPair::with_rational_length(a.value, *len.numer(), *len.denom()),
            };
        }
        if let Some(len) = self.length_irrational {
            return IntervalPair::with_irrational_length(a.value, len.value);
        }
        let b = self.beta.unwrap_or(Number {
            value: 3.0,
            exact: Some(Ratio::from_integer(3)),
        });
        match (a.exact, b.exact) {
            (Some(ea), Some(eb)) if eb > ea => IntervalPair::exact(ea, eb),
            _ => IntervalPair::new(a.value, b.value),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    /// Branch indices `a..b`, inclusive.
    #[arg(long, value_parser = parse_index_range, allow_hyphen_values = true, conflicts_with = "window")]
    pub branches: Option<IndexRange>,
    /// Eigenvalue window `lo..hi`.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<Window>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Only decide whether the geometry is a spectral set (and tiles).
    #[arg(long)]
    pub set_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// `h(t)` for several couplings.
    H,
    /// `λ_n(w)` for `w` across `[0, 1]`.
    LambdaW,
    /// Fractional parts of the spectrum on an irrational length.
    Orbit,
}

#[derive(Debug, Clone, Args)]
pub struct CurvesArgs {
    #[arg(value_enum)]
    pub kind: CurveKind,
    #[command(flatten)]
    pub common: Common,
    /// Couplings for `h`, comma separated.
    #[arg(long, value_parser = parse_real, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.1,0.5,0.9")]
    pub w_list: Vec<f64>,
    /// Range of `t` for `h`.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true, default_value = "-2..2")]
    pub t_range: Window,
    /// Samples per curve.
    #[arg(long, default_value_t = 401)]
    pub samples: usize,
    /// Branches traced by `lambda-w`.
    #[arg(long, value_parser = parse_index_range, allow_hyphen_values = true, default_value = "-4..4")]
    pub branches: IndexRange,
    /// Orbit sizes for `orbit`, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initial {
    /// Smooth bump in the first interval.
    Bump,
    /// Random combination of eigenfunctions (uses `--seed`).
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "bump")]
    pub initial: Initial,
    #[arg(long, default_value = "0.5", value_parser = parse_number)]
    pub bump_center: Number,
    #[arg(long, default_value = "0.1", value_parser = parse_number)]
    pub bump_radius: Number,
    /// Number of eigenfunctions in a random initial state.
    #[arg(long, default_value_t = 10)]
    pub terms: usize,
    /// Snapshot times, comma separated.
    #[arg(long, value_parser = parse_real, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0.1,0.2")]
    pub times: Vec<f64>,
    /// Branches `-N..=N` kept in the expansion.
    #[arg(long, default_value_t = twoint::evolution::DEFAULT_TRUNCATION)]
    pub truncation: i64,
    #[arg(long, default_value_t = twoint::evolution::DEFAULT_POINTS_PER_UNIT)]
    pub points_per_unit: usize,
    /// Keep every k-th grid point in snapshots.
    #[arg(long, default_value_t = 16)]
    pub stride: usize,
    /// Also write the JSON summary here (with `--format csv|svg`).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}
