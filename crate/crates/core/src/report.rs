//! Metrics CSV, trace logs, summaries and SVG line plots.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METRICS_HEADER: [&str; 5] = ["experiment", "param", "run", "metric", "value"];

/// Renders `x` with 6 significant digits, C `%g` style.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Which run a metric row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RunLabel {
    Run(u32),
    Aggregate,
}

impl std::fmt::Display for RunLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunLabel::Run(i) => write!(f, "{i}"),
            RunLabel::Aggregate => f.write_str("aggregate"),
        }
    }
}

impl std::str::FromStr for RunLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aggregate" => Ok(RunLabel::Aggregate),
            other => other
                .parse()
                .map(RunLabel::Run)
                .map_err(|_| Error::param("run", format!("expected a run index or `aggregate`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub experiment: String,
    /// Parameter point, `key=value` pairs joined by `;`.
    pub param: String,
    pub run: RunLabel,
    pub metric: String,
    pub value: f64,
}

impl MetricsRow {
    pub fn new(experiment: &str, param: impl Into<String>, run: RunLabel, metric: &str, value: f64) -> Self {
        MetricsRow { experiment: experiment.to_string(), param: param.into(), run, metric: metric.to_string(), value }
    }

    fn sort_key(&self) -> (&str, &str, RunLabel, &str) {
        (&self.experiment, &self.param, self.run, &self.metric)
    }
}

/// Rows sorted by (experiment, param, run, metric) and rendered as CSV.
pub fn render_metrics(rows: &[MetricsRow]) -> String {
    let mut sorted: Vec<&MetricsRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_HEADER).expect("in-memory write");
    for r in sorted {
        w.write_record([&r.experiment, &r.param, &r.run.to_string(), &r.metric, &format_sig(r.value)])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn parse_metrics(text: &str) -> Result<Vec<MetricsRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if rec.len() != 5 {
            return Err(Error::Parse { line, message: format!("expected 5 fields, found {}", rec.len()) });
        }
        let value = rec[4].parse().map_err(|_| Error::Parse { line, message: format!("bad value `{}`", &rec[4]) })?;
        let run = rec[2].parse().map_err(|e: Error| Error::Parse { line, message: e.to_string() })?;
        rows.push(MetricsRow { experiment: rec[0].into(), param: rec[1].into(), run, metric: rec[3].into(), value });
    }
    Ok(rows)
}

pub fn write_metrics(rows: &[MetricsRow], path: &Path) -> Result<()> {
    write_atomic(path, render_metrics(rows).as_bytes())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metrics(&text)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// One JSON object per line.
pub fn write_trace<S: Serialize>(records: &[S], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>) -> Self {
        Series { name: name.into(), xs, ys }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotLabels {
    pub title: String,
    pub x: String,
    pub y: String,
}

const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;

fn coord(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Self-contained SVG 1.1 line chart: axes with 5 ticks each, one polyline
/// per series (a marker for single points) and a legend.
pub fn render_plot(labels: &PlotLabels, series: &[Series]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Empty("plot series"));
    }
    for s in series {
        if s.xs.len() != s.ys.len() {
            return Err(Error::SeriesLength { name: s.name.clone(), xs: s.xs.len(), ys: s.ys.len() });
        }
    }
    let (x0, x1) = axis_range(series.iter().flat_map(|s| s.xs.iter().copied()));
    let (y0, y1) = axis_range(series.iter().flat_map(|s| s.ys.iter().copied()));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, coord(LEFT + pw / 2.0), escape(&labels.title));
    let _ = writeln!(
        svg,
        r#"<path d="M{} {} V{} H{}" fill="none" stroke="black"/>"#,
        coord(LEFT),
        coord(TOP),
        coord(TOP + ph),
        coord(LEFT + pw)
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(svg, r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>"#, coord(px), coord(TOP + ph), coord(TOP + ph + 4.0));
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, coord(px), coord(TOP + ph + 16.0), format_sig(xv));
        let _ = writeln!(svg, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>"#, coord(LEFT - 4.0), coord(py), coord(LEFT));
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, coord(LEFT - 6.0), coord(py + 4.0), format_sig(yv));
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, coord(LEFT + pw / 2.0), coord(HEIGHT - 12.0), escape(&labels.x));
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        coord(TOP + ph / 2.0),
        escape(&labels.y)
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s.xs.iter().zip(&s.ys).map(|(&x, &y)| format!("{},{}", coord(sx(x)), coord(sy(y)))).collect();
        match pts.len() {
            0 => {}
            1 => {
                let (x, y) = (sx(s.xs[0]), sy(s.ys[0]));
                let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#, coord(x), coord(y));
            }
            _ => {
                let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
            }
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(svg, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{color}" stroke-width="2"/>"#, coord(lx), coord(ly), coord(lx + 18.0));
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, coord(lx + 24.0), coord(ly + 4.0), escape(&s.name));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_plot(labels: &PlotLabels, series: &[Series], path: &Path) -> Result<()> {
    write_atomic(path, render_plot(labels, series)?.as_bytes())
}

/// Per-experiment summary written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub seed: u64,
    pub runs: u32,
    pub parameters: serde_json::Value,
    /// Every aggregate row, keyed `param/metric`.
    pub aggregates: std::collections::BTreeMap<String, f64>,
}

impl Summary {
    pub fn from_rows(experiment: &str, seed: u64, runs: u32, parameters: serde_json::Value, rows: &[MetricsRow]) -> Self {
        let aggregates = rows
            .iter()
            .filter(|r| r.run == RunLabel::Aggregate)
            .map(|r| (format!("{}/{}", r.param, r.metric), r.value))
            .collect();
        Summary { experiment: experiment.to_string(), seed, runs, parameters, aggregates }
    }
}

/// Where one experiment's outputs went.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportBundle {
    pub metrics: PathBuf,
    pub summary: PathBuf,
    pub trace: Option<PathBuf>,
    pub plots: Vec<PathBuf>,
}
