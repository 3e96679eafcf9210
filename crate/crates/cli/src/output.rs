use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

/// Compact JSON with every float as 17 significant digits.
///
/// Parsing a document and writing it again with this formatter reproduces it byte for byte.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactFloats;

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// The document every JSON-emitting command writes.
#[derive(Debug, Serialize)]
pub struct Document<C: Serialize, R: Serialize> {
    pub config: C,
    pub result: R,
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
}

/// CSV with an explicit header, for tables that may be empty.
pub fn to_csv_with_header<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String, csv::Error> {
    if rows.is_empty() {
        return Ok(format!("{}\n", header.join(",")));
    }
    to_csv(rows)
}

/// One named polyline or point set of a plot.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers instead of a connected line.
    pub scatter: bool,
}

/// Minimal static SVG: polylines, vertical guide lines, axis ticks.
#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub guides: Vec<f64>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

impl Plot {
    pub fn render(&self) -> String {
        let (w, h, m) = (720.0, 480.0, 60.0);
        let pts = self.series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            (x0, x1) = (x0 - 0.5, x1 + 0.5);
        }
        if y1 - y0 < 1e-12 {
            (y0, y1) = (y0 - 0.5, y1 + 0.5);
        }
        let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
        let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

        let mut s = String::new();
        s += &format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        );
        s += &format!("<title>{}</title>\n", escape(&self.title));
        s += &format!("<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n");
        s += &format!(
            "<path d=\"M{m},{} H{} M{m},{} V{m}\" stroke=\"black\" fill=\"none\"/>\n",
            h - m,
            w - m,
            h - m
        );
        for t in ticks(x0, x1) {
            let x = sx(t);
            s += &format!("<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>", h - m, h - m + 5.0);
            s += &format!("<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", h - m + 18.0, fmt_tick(t));
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            s += &format!("<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{m}\" y2=\"{y:.2}\" stroke=\"black\"/>", m - 5.0);
            s += &format!("<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n", m - 8.0, y + 4.0, fmt_tick(t));
        }
        for &g in &self.guides {
            if g >= x0 && g <= x1 {
                let x = sx(g);
                s += &format!(
                    "<line x1=\"{x:.2}\" y1=\"{m}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n",
                    h - m
                );
            }
        }
        for (i, ser) in self.series.iter().enumerate() {
            let c = PALETTE[i % PALETTE.len()];
            if ser.scatter {
                for &(x, y) in &ser.points {
                    s += &format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{c}\"/>", sx(x), sy(y));
                }
                s += "\n";
            } else {
                let path: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                s += &format!("<polyline fill=\"none\" stroke=\"{c}\" points=\"{}\"/>\n", path.join(" "));
            }
            s += &format!(
                "<text x=\"{}\" y=\"{}\" fill=\"{c}\">{}</text>\n",
                w - m - 140.0,
                m + 14.0 * i as f64,
                escape(&ser.label)
            );
        }
        s += &format!("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", w / 2.0, h - 15.0, escape(&self.x_label));
        s += &format!(
            "<text x=\"15\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">{}</text>\n",
            h / 2.0,
            h / 2.0,
            escape(&self.y_label)
        );
        s += "</svg>\n";
        s
    }
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
