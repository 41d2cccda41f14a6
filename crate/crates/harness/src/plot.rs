//! Minimal SVG line charts for summary curves.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::output::write_text;
use crate::summary::{Curve, SummaryDoc};

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const MAX_POINTS: usize = 400;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub struct Series<'a> {
    pub label: &'a str,
    pub x: Vec<f64>,
    pub y: &'a [f64],
    pub band: Option<&'a [f64]>,
}

impl<'a> Series<'a> {
    fn from_curve(label: &'a str, x: Vec<f64>, c: &'a Curve) -> Self {
        Series {
            label,
            x,
            y: &c.mean,
            band: c.half_width.as_deref(),
        }
    }
}

/// Step indices to draw, at most [`MAX_POINTS`], always keeping the last.
fn thin(n: usize) -> Vec<usize> {
    if n <= MAX_POINTS {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..MAX_POINTS).map(|i| i * (n - 1) / (MAX_POINTS - 1)).collect();
    idx.dedup();
    idx
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for s in series {
        for (i, (&x, &y)) in s.x.iter().zip(s.y).enumerate() {
            let hw = s.band.map_or(0.0, |b| b[i]);
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y - hw);
            y1 = y1.max(y + hw);
        }
    }
    if !x0.is_finite() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    for t in nice_ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{:.1}" stroke="#eee"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 18.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#eee"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 14.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + ph / 2.0,
        escape(ylabel)
    );

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let idx = thin(s.y.len().min(s.x.len()));
        if let Some(b) = s.band {
            let upper = idx.iter().map(|&i| format!("{:.2},{:.2}", sx(s.x[i]), sy(s.y[i] + b[i])));
            let lower = idx.iter().rev().map(|&i| format!("{:.2},{:.2}", sx(s.x[i]), sy(s.y[i] - b[i])));
            let pts: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(
                svg,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                pts.join(" ")
            );
        }
        let pts: Vec<String> = idx
            .iter()
            .map(|&i| format!("{:.2},{:.2}", sx(s.x[i]), sy(s.y[i])))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Normalized regret vs step, unique candidates vs step, and normalized
/// regret vs wall-clock, one line per summary.
pub fn write_panels(docs: &[&SummaryDoc], dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    if docs.is_empty() {
        return Ok(Vec::new());
    }
    let steps = |d: &SummaryDoc| (1..=d.curves.normalized_regret.mean.len()).map(|t| t as f64).collect::<Vec<_>>();
    let label = |d: &SummaryDoc| d.combination.algorithm.clone();
    let labels: Vec<String> = docs.iter().map(|d| label(d)).collect();

    let regret: Vec<Series> = docs
        .iter()
        .zip(&labels)
        .map(|(d, l)| Series::from_curve(l, steps(d), &d.curves.normalized_regret))
        .collect();
    let unique: Vec<Series> = docs
        .iter()
        .zip(&labels)
        .map(|(d, l)| Series::from_curve(l, steps(d), &d.curves.unique_candidates))
        .collect();
    let timed: Vec<Series> = docs
        .iter()
        .zip(&labels)
        .map(|(d, l)| Series {
            label: l,
            x: d.curves.elapsed_seconds.mean.clone(),
            y: &d.curves.normalized_regret.mean,
            band: None,
        })
        .collect();

    let panels = [
        ("regret", line_chart(&format!("{prefix}: normalized average regret"), "step t", "R_t / t (uniform = 1)", &regret)),
        ("unique", line_chart(&format!("{prefix}: unique candidates"), "step t", "q_t", &unique)),
        (
            "regret_vs_time",
            line_chart(&format!("{prefix}: regret against wall-clock"), "seconds", "R_t / t (uniform = 1)", &timed),
        ),
    ];
    let mut out = Vec::new();
    for (name, svg) in panels {
        let path = dir.join(format!("{prefix}_{name}.svg"));
        write_text(&path, &svg)?;
        out.push(path);
    }
    Ok(out)
}
