use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use twoint::evolution::{check_transition_probabilities, evolve, Bump, Eigenbasis, Expansion, ExpansionConfig};
use twoint::pairs::{classify_pair, spectral_set_criterion, tiles_with, tiling_set_for, Condition, TilingSet};
use twoint::spectrum::{fractional_orbit, h_function, spectrum_branches, spectrum_window, SpectrumSlice};
use twoint::{BoundaryParams, Error, IntervalPair, LengthTag};

use crate::args::{ClassifyArgs, Common, CurveKind, CurvesArgs, EvolveArgs, Format, Initial, SpectrumArgs};
use crate::output::{to_csv_with_header, to_json, Document, Plot, Series};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(String),
}

impl CliError {
    /// 2 for bad input, 3 for solver failure, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_internal() => 3,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) | CliError::Io(s) => f.write_str(s),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type Out = Result<String, CliError>;

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct ConfigEcho {
    subcommand: &'static str,
    w: f64,
    phi: f64,
    psi: f64,
    theta: f64,
    alpha: f64,
    beta: f64,
    length: LengthTag,
    format: Format,
    tol: f64,
    seed: u64,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

fn echo(name: &'static str, c: &Common, d: &IntervalPair, extra: Value) -> ConfigEcho {
    ConfigEcho {
        subcommand: name,
        w: c.w.value,
        phi: c.phi.value,
        psi: c.psi.value,
        theta: c.theta.value,
        alpha: d.alpha,
        beta: d.beta,
        length: d.length,
        format: c.format,
        tol: c.tol.value,
        seed: c.seed,
        extra: match extra {
            Value::Object(m) => m,
            _ => Map::new(),
        },
    }
}

fn setup(c: &Common) -> Result<(BoundaryParams, IntervalPair), CliError> {
    if !(c.tol.value > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", c.tol.value)));
    }
    Ok((c.params()?, c.geometry()?))
}

fn json_doc<R: Serialize>(config: ConfigEcho, result: R) -> Out {
    Ok(to_json(&Document { config, result })?)
}

fn no_svg(cmd: &str) -> CliError {
    CliError::Usage(format!("`{cmd}` has no SVG rendering; use --format json or csv"))
}

#[derive(Debug, Serialize)]
pub struct SpectrumRow {
    pub n: i64,
    pub lambda: f64,
    pub multiplicity: u8,
    pub re_a: f64,
    pub im_a: f64,
    pub residual: f64,
}

const SPECTRUM_HEADER: [&str; 6] = ["n", "lambda", "multiplicity", "re_a", "im_a", "residual"];

fn rows(slice: &SpectrumSlice) -> Vec<SpectrumRow> {
    slice
        .entries
        .iter()
        .map(|x| SpectrumRow {
            n: x.n,
            lambda: x.lambda,
            multiplicity: x.multiplicity,
            re_a: x.a.re,
            im_a: x.a.im,
            residual: x.residual,
        })
        .collect()
}

pub fn spectrum(a: &SpectrumArgs) -> Out {
    let (p, d) = setup(&a.common)?;
    let (slice, extra) = match (a.window, a.branches) {
        (Some(w), _) => (spectrum_window(&p, &d, w.lo, w.hi)?, json!({ "window": [w.lo, w.hi] })),
        (None, r) => {
            let r = r.unwrap_or(crate::args::IndexRange { first: -10, last: 10 });
            (spectrum_branches(&p, &d, r.first, r.last)?, json!({ "branches": [r.first, r.last] }))
        }
    };
    let worst = slice.max_residual();
    if worst > a.common.tol.value {
        return Err(CliError::Core(Error::Solver(format!(
            "eigenvalue residual {worst:e} exceeds --tol {}",
            a.common.tol.value
        ))));
    }
    let table = rows(&slice);
    match a.common.format {
        Format::Csv => Ok(to_csv_with_header(&SPECTRUM_HEADER, &table)?),
        Format::Json => json_doc(
            echo("spectrum", &a.common, &d, extra),
            json!({ "structure": slice.structure, "maxResidual": worst, "rows": table }),
        ),
        Format::Svg => {
            let points = slice.entries.iter().map(|x| (x.lambda, x.multiplicity as f64)).collect();
            Ok(Plot {
                title: format!("spectrum on {d}, w = {}", p.w),
                x_label: "λ".into(),
                y_label: "multiplicity".into(),
                series: vec![Series {
                    label: "eigenvalues".into(),
                    points,
                    scatter: true,
                }],
                guides: vec![],
            }
            .render())
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct ConditionOut {
    id: String,
    satisfied: bool,
    residual: f64,
    exact: bool,
}

fn conditions(c: &[Condition]) -> Vec<ConditionOut> {
    c.iter()
        .map(|c| ConditionOut {
            id: c.id.clone(),
            satisfied: c.satisfied,
            residual: c.residual,
            exact: c.exact,
        })
        .collect()
}

fn ratio_str(r: &num_rational::Ratio<i64>) -> String {
    if r.is_integer() { r.numer().to_string() } else { format!("{}/{}", r.numer(), r.denom()) }
}

fn tiling_json(d: &IntervalPair) -> Result<Value, CliError> {
    let Some(set) = tiling_set_for(d) else {
        return Ok(Value::Null);
    };
    let set_json = |s: &TilingSet| json!({ "finite": s.finite.iter().map(ratio_str).collect::<Vec<_>>(), "period": ratio_str(&s.period) });
    if d.exact_endpoints().is_none() {
        return Ok(json!({ "set": set_json(&set), "checked": false, "reason": "endpoints not exact" }));
    }
    let span = set.period * 4 + num_rational::Ratio::from_integer(d.beta.ceil() as i64);
    let r = tiles_with(d, &set, -span, span)?;
    Ok(json!({
        "set": set_json(&set),
        "checked": true,
        "window": [ratio_str(&-span), ratio_str(&span)],
        "tiles": r.tiles,
        "witness": r.witness,
        "witnessCount": r.witness_count,
        "translatesChecked": r.translates_checked,
    }))
}

pub fn classify(a: &ClassifyArgs) -> Out {
    let (p, d) = setup(&a.common)?;
    let set = spectral_set_criterion(&d);
    let set_json = json!({
        "isSpectralSet": set.is_spectral_set,
        "reason": set.reason,
        "conditions": conditions(&set.conditions),
    });
    let tiling = tiling_json(&d)?;
    let extra = json!({ "setOnly": a.set_only });
    let (result, table) = if a.set_only {
        (json!({ "spectralSet": set_json, "tiling": tiling }), conditions(&set.conditions))
    } else {
        let v = classify_pair(&p, &d);
        let result = json!({
            "isSpectralOperator": v.is_spectral_operator,
            "regime": v.regime,
            "conditions": conditions(&v.conditions),
            "failing": v.failing().map(|c| c.id.clone()).collect::<Vec<_>>(),
            "spectrum": v.spectrum,
            "coefficientResidual": v.coefficient_residual,
            "spectralSet": set_json,
            "tiling": tiling,
        });
        (result, conditions(&v.conditions))
    };
    match a.common.format {
        Format::Json => json_doc(echo("classify", &a.common, &d, extra), result),
        Format::Csv => Ok(to_csv_with_header(&["id", "satisfied", "residual", "exact"], &table)?),
        Format::Svg => Err(no_svg("classify")),
    }
}

/// Points where `2w - (1+w²) cos 2π(φ+t)` changes sign in `[lo, hi]`.
fn branch_cuts(w: f64, phi: f64, lo: f64, hi: f64) -> Vec<f64> {
    let c = (2.0 * w / (1.0 + w * w)).acos() / (2.0 * PI);
    let mut out = Vec::new();
    let first = (lo + phi - c).floor() as i64 - 1;
    let last = (hi + phi + c).ceil() as i64 + 1;
    for k in first..=last {
        for t in [k as f64 + c - phi, k as f64 - c - phi] {
            if t >= lo && t <= hi {
                out.push(t);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn samples(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

pub fn curves(a: &CurvesArgs) -> Out {
    let (p, d) = setup(&a.common)?;
    match a.kind {
        CurveKind::H => h_curves(a, &p, &d),
        CurveKind::LambdaW => lambda_w(a, &p, &d),
        CurveKind::Orbit => orbit(a, &p, &d),
    }
}

fn h_curves(a: &CurvesArgs, p: &BoundaryParams, d: &IntervalPair) -> Out {
    #[derive(Serialize)]
    struct Row {
        w: f64,
        t: f64,
        h: f64,
    }
    let (lo, hi) = (a.t_range.lo, a.t_range.hi);
    let mut table = Vec::new();
    let mut curves = Vec::new();
    let mut cuts = Vec::new();
    for &w in &a.w_list {
        let q = p.with_w(w);
        q.validate()?;
        let pts = samples(lo, hi, a.samples)
            .map(|t| h_function(&q, d, t).map(|h| (t, h)))
            .collect::<twoint::Result<Vec<_>>>()?;
        table.extend(pts.iter().map(|&(t, h)| Row { w, t, h }));
        cuts.push((w, branch_cuts(w, p.phi, lo, hi)));
        curves.push((w, pts));
    }
    match a.common.format {
        Format::Csv => Ok(to_csv_with_header(&["w", "t", "h"], &table)?),
        Format::Json => json_doc(
            echo("curves", &a.common, d, json!({ "kind": a.kind, "wList": a.w_list, "tRange": [lo, hi], "samples": a.samples })),
            json!({
                "curves": curves.iter().map(|(w, pts)| json!({ "w": w, "points": pts })).collect::<Vec<_>>(),
                "branchCuts": cuts.iter().map(|(w, t)| json!({ "w": w, "t": t })).collect::<Vec<_>>(),
            }),
        ),
        Format::Svg => Ok(Plot {
            title: format!("h(t) on {d}"),
            x_label: "t".into(),
            y_label: "h(t)".into(),
            series: curves
                .into_iter()
                .map(|(w, points)| Series {
                    label: format!("w = {w}"),
                    points,
                    scatter: false,
                })
                .collect(),
            guides: cuts.into_iter().flat_map(|(_, t)| t).collect(),
        }
        .render()),
    }
}

fn lambda_w(a: &CurvesArgs, p: &BoundaryParams, d: &IntervalPair) -> Out {
    #[derive(Serialize)]
    struct Row {
        w: f64,
        n: i64,
        lambda: f64,
    }
    let (first, last) = (a.branches.first, a.branches.last);
    let mut table = Vec::new();
    for w in samples(0.0, 1.0, a.samples) {
        let s = spectrum_branches(&p.with_w(w), d, first, last)?;
        for n in first..=last {
            if let Some(x) = s.entries.iter().find(|x| x.indices().contains(&n)) {
                table.push(Row { w, n, lambda: x.lambda });
            }
        }
    }
    match a.common.format {
        Format::Csv => Ok(to_csv_with_header(&["w", "n", "lambda"], &table)?),
        Format::Json => json_doc(
            echo("curves", &a.common, d, json!({ "kind": a.kind, "branches": [first, last], "samples": a.samples })),
            json!({ "rows": table }),
        ),
        Format::Svg => Ok(Plot {
            title: format!("λ_n(w) on {d}"),
            x_label: "w".into(),
            y_label: "λ".into(),
            series: (first..=last)
                .map(|n| Series {
                    label: format!("n = {n}"),
                    points: table.iter().filter(|r| r.n == n).map(|r| (r.w, r.lambda)).collect(),
                    scatter: false,
                })
                .collect(),
            guides: vec![],
        }
        .render()),
    }
}

fn orbit(a: &CurvesArgs, p: &BoundaryParams, d: &IntervalPair) -> Out {
    #[derive(Serialize)]
    struct Row {
        count: usize,
        k: usize,
        fraction: f64,
    }
    let max = a.counts.iter().copied().max().unwrap_or(0);
    let all = fractional_orbit(p, d, max)?;
    let mut table = Vec::new();
    let mut sets = Vec::new();
    for &count in &a.counts {
        let pts = &all[..count];
        table.extend(pts.iter().enumerate().map(|(k, &fraction)| Row { count, k, fraction }));
        let mut sorted = pts.to_vec();
        sorted.sort_by(f64::total_cmp);
        let min_gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        sets.push(json!({
            "count": count,
            "points": pts,
            "minSeparation": if min_gap.is_finite() { Some(min_gap) } else { None },
            "coveringRadius": twoint::spectrum::covering_radius(pts),
        }));
    }
    match a.common.format {
        Format::Csv => Ok(to_csv_with_header(&["count", "k", "fraction"], &table)?),
        Format::Json => json_doc(
            echo("curves", &a.common, d, json!({ "kind": a.kind, "counts": a.counts })),
            json!({ "orbits": sets }),
        ),
        Format::Svg => Ok(Plot {
            title: format!("fractional parts on {d}"),
            x_label: "fractional part".into(),
            y_label: "orbit size".into(),
            series: a
                .counts
                .iter()
                .map(|&c| Series {
                    label: format!("{c} points"),
                    points: all[..c].iter().map(|&x| (x, c as f64)).collect(),
                    scatter: true,
                })
                .collect(),
            guides: vec![],
        }
        .render()),
    }
}

#[derive(Debug, Serialize)]
struct SnapshotRow {
    t: f64,
    x: f64,
    interval: u8,
    re_f: f64,
    im_f: f64,
    abs2: f64,
}

pub struct EvolveOutput {
    pub main: String,
    pub summary: String,
}

pub fn evolve_cmd(a: &EvolveArgs) -> Result<EvolveOutput, CliError> {
    let (p, d) = setup(&a.common)?;
    if a.truncation < 0 || a.points_per_unit < 8 || a.stride == 0 {
        return Err(CliError::Usage("need --truncation >= 0, --points-per-unit >= 8, --stride >= 1".into()));
    }
    if a.times.iter().any(|t| !t.is_finite()) {
        return Err(CliError::Usage("times must be finite".into()));
    }
    let cfg = ExpansionConfig {
        truncation: a.truncation,
        points_per_unit: a.points_per_unit,
    };
    let basis = Arc::new(Eigenbasis::symmetric(&p, &d, a.truncation)?);
    let bump = match a.initial {
        Initial::Bump => Some(Bump::new(a.bump_center.value, a.bump_radius.value)?),
        Initial::Random => None,
    };
    let (input, state) = match bump {
        Some(b) => {
            let (lo, hi) = b.support();
            if lo < 0.0 || hi > 1.0 {
                return Err(CliError::Core(Error::Precondition(format!(
                    "bump support [{lo}, {hi}] must lie in [0, 1]"
                ))));
            }
            let g = b.on_grid(&d, a.points_per_unit);
            let s = twoint::evolution::expand(&g, basis)?;
            (g, s)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
            let mut c = vec![Complex64::new(0.0, 0.0); basis.modes().len()];
            for _ in 0..a.terms {
                let k = rng.random_range(0..c.len());
                c[k] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            let s = Expansion::from_coefficients(basis, c)?;
            (s.to_grid(a.points_per_unit), s)
        }
    };

    let mut steps = Vec::new();
    let mut snapshots = Vec::new();
    let mut series = Vec::new();
    for &t in &a.times {
        let st = evolve(&state, t);
        // U(0) is the identity, so the first snapshot is the input itself
        let g = if t == 0.0 { input.clone() } else { st.to_grid(a.points_per_unit) };
        let width = bump.map(|b| b.width() + t.abs());
        let window_mass = |lo: f64| width.filter(|&w| w < 1.0 && w <= d.length()).map(|w| g.norm_on(lo, lo + w).powi(2));
        steps.push(json!({
            "t": t,
            "coefficientNorm": st.norm(),
            "gridNorm": g.norm(),
            "boundaryResidual": st.boundary_residual(),
            "massFirst": g.norm_on(0.0, 1.0).powi(2),
            "massSecond": g.norm_on(d.alpha, d.beta).powi(2),
            "massAt0": window_mass(0.0),
            "massAtAlpha": window_mass(d.alpha),
        }));
        let rows: Vec<SnapshotRow> = g
            .nodes()
            .zip(g.values())
            .step_by(a.stride)
            .map(|((x, first), v)| SnapshotRow {
                t,
                x,
                interval: if first { 1 } else { 2 },
                re_f: v.re,
                im_f: v.im,
                abs2: v.norm_sqr(),
            })
            .collect();
        series.push(Series {
            label: format!("t = {t}"),
            points: rows.iter().map(|r| (r.x, r.abs2)).collect(),
            scatter: false,
        });
        snapshots.push(rows);
    }

    let transition = match bump {
        Some(b) => {
            let t = a.times.iter().copied().fold(0.0, f64::max);
            match check_transition_probabilities(&p, &d, &b, t, cfg) {
                Ok(r) => json!({
                    "t": t,
                    "fractionAt0": r.fraction_at_0,
                    "fractionAtAlpha": r.fraction_at_alpha,
                    "expectedFractionAt0": p.w * p.w,
                    "expectedFractionAtAlpha": 1.0 - p.w * p.w,
                    "phase0": r.phase_0.map(|z| z.arg() / (2.0 * PI)),
                    "phaseAlpha": r.phase_alpha.map(|z| z.arg() / (2.0 * PI)),
                    "window": r.window,
                }),
                Err(Error::Precondition(why)) => json!({ "t": t, "skipped": why }),
                Err(e) => return Err(e.into()),
            }
        }
        None => Value::Null,
    };
    let extra = json!({
        "initial": a.initial,
        "bump": bump.map(|b| json!({ "center": b.center, "radius": b.radius })),
        "terms": if bump.is_none() { Some(a.terms) } else { None },
        "times": a.times,
        "truncation": a.truncation,
        "pointsPerUnit": a.points_per_unit,
        "stride": a.stride,
    });
    let summary = json!({
        "truncationResidual": state.truncation_residual,
        "modes": state.basis().modes().len(),
        "regime": p.regime(),
        "steps": steps,
        "transition": transition,
    });
    let summary_doc = json_doc(echo("evolve", &a.common, &d, extra.clone()), &summary)?;
    let main = match a.common.format {
        Format::Json => {
            let snaps: Vec<Value> = snapshots
                .iter()
                .map(|rows| {
                    json!({
                        "t": rows.first().map(|r| r.t),
                        "x": rows.iter().map(|r| r.x).collect::<Vec<_>>(),
                        "interval": rows.iter().map(|r| r.interval).collect::<Vec<_>>(),
                        "re": rows.iter().map(|r| r.re_f).collect::<Vec<_>>(),
                        "im": rows.iter().map(|r| r.im_f).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json_doc(echo("evolve", &a.common, &d, extra), json!({ "summary": summary, "snapshots": snaps }))?
        }
        Format::Csv => {
            let all: Vec<&SnapshotRow> = snapshots.iter().flatten().collect();
            to_csv_with_header(&["t", "x", "interval", "re_f", "im_f", "abs2"], &all)?
        }
        Format::Svg => Plot {
            title: format!("|f|² on {d}, w = {}", p.w),
            x_label: "x".into(),
            y_label: "|f(x)|²".into(),
            series,
            guides: vec![1.0, d.alpha],
        }
        .render(),
    };
    Ok(EvolveOutput {
        main,
        summary: summary_doc,
    })
}
