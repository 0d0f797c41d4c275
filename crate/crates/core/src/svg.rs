//! Minimal standalone SVG charts: multi-series line plots and grouped
//! bar charts, enough for run comparisons and sweep summaries without
//! pulling in a plotting stack.

use std::fmt::Write as _;
use std::path::Path;

use crate::Result;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 74.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 58.0;

const PALETTE: [&str; 6] =
    ["#4c72b0", "#c44e52", "#55a868", "#8172b2", "#ccb974", "#64b5cd"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick positions with a 1-2-5 step covering [lo, hi].
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let range = (hi - lo).abs().max(1e-12);
    let raw = range / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| range / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() * step;
    let mut out = Vec::new();
    let mut t = first;
    while t <= hi + step * 1e-9 {
        // Clean up -0.0 and float dust for label rendering.
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if a >= 1e4 || a < 1e-3 {
        format!("{v:.1e}")
    } else if a >= 10.0 {
        format!("{v:.0}")
    } else if a >= 1.0 {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// One labelled line on a chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points }
    }
}

/// Multi-series line chart with automatic axes.
#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (v - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if (hi - lo).abs() < 1e-12 {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = (hi - lo) * 0.04;
        (lo - pad, hi + pad)
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"Helvetica, Arial, sans-serif\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"26\" font-size=\"17\" text-anchor=\"middle\" fill=\"#222\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    for t in ticks(frame.x_lo, frame.x_hi, 8) {
        let x = frame.x(t);
        let _ = write!(
            out,
            "<line x1=\"{x:.1}\" y1=\"{y0}\" x2=\"{x:.1}\" y2=\"{y1}\" stroke=\"#e5e5e5\"/>\n\
             <text x=\"{x:.1}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#444\">{}</text>\n",
            y0 + 18.0,
            tick_label(t)
        );
    }
    for t in ticks(frame.y_lo, frame.y_hi, 6) {
        let y = frame.y(t);
        let _ = write!(
            out,
            "<line x1=\"{x0}\" y1=\"{y:.1}\" x2=\"{x1}\" y2=\"{y:.1}\" stroke=\"#e5e5e5\"/>\n\
             <text x=\"{}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\" fill=\"#444\">{}</text>\n",
            x0 - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = write!(
        out,
        "<rect x=\"{x0}\" y=\"{y1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333\"/>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#222\">{}</text>\n\
         <text x=\"18\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#222\" \
         transform=\"rotate(-90 18 {})\">{}</text>\n",
        x1 - x0,
        y0 - y1,
        (x0 + x1) / 2.0,
        HEIGHT - 16.0,
        escape(x_label),
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, labels: &[&str]) {
    let mut x = MARGIN_LEFT + 10.0;
    let y = MARGIN_TOP + 16.0;
    for (i, label) in labels.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            out,
            "<line x1=\"{x:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{color}\" stroke-width=\"2.5\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12.5\" fill=\"#222\">{}</text>\n",
            x + 22.0,
            x + 28.0,
            y + 4.0,
            escape(label)
        );
        x += 28.0 + 9.0 * label.len() as f64 + 26.0;
    }
}

impl LineChart {
    pub fn render(&self) -> String {
        let mut pts = self.series.iter().flat_map(|s| s.points.iter());
        let first = pts.next().copied().unwrap_or((0.0, 0.0));
        let mut x_lo = first.0;
        let mut x_hi = first.0;
        let mut y_lo = first.1;
        let mut y_hi = first.1;
        for &(x, y) in self.series.iter().flat_map(|s| s.points.iter()) {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
        let (x_lo, x_hi) = padded(x_lo, x_hi);
        let (y_lo, y_hi) = padded(y_lo, y_hi);
        let frame = Frame { x_lo, x_hi, y_lo, y_hi };

        let mut out = header(&self.title);
        axes(&mut out, &frame, &self.x_label, &self.y_label);
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut path = String::new();
            for &(x, y) in &series.points {
                let _ = write!(path, "{:.1},{:.1} ", frame.x(x), frame.y(y));
            }
            let _ = write!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
                path.trim_end()
            );
        }
        let labels: Vec<&str> = self.series.iter().map(|s| s.label.as_str()).collect();
        legend(&mut out, &labels);
        out.push_str("</svg>\n");
        out
    }
}

/// Grouped bar chart: one cluster per group, one bar per series.
#[derive(Debug, Clone)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub groups: Vec<String>,
    /// (series label, one value per group).
    pub series: Vec<(String, Vec<f64>)>,
}

impl BarChart {
    pub fn render(&self) -> String {
        let y_hi = self
            .series
            .iter()
            .flat_map(|(_, v)| v.iter())
            .fold(0.0f64, |m, v| m.max(*v));
        let frame = Frame {
            x_lo: 0.0,
            x_hi: self.groups.len().max(1) as f64,
            y_lo: 0.0,
            y_hi: if y_hi > 0.0 { y_hi * 1.12 } else { 1.0 },
        };

        let mut out = header(&self.title);
        axes(&mut out, &frame, "", &self.y_label);

        let cluster = frame.x(1.0) - frame.x(0.0);
        let bar = cluster * 0.7 / self.series.len().max(1) as f64;
        let base = frame.y(0.0);
        for (g, group) in self.groups.iter().enumerate() {
            let left = frame.x(g as f64) + cluster * 0.15;
            for (s, (_, values)) in self.series.iter().enumerate() {
                let v = values.get(g).copied().unwrap_or(0.0);
                let top = frame.y(v);
                let _ = write!(
                    out,
                    "<rect x=\"{:.1}\" y=\"{top:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
                     fill=\"{}\" stroke=\"#333\" stroke-width=\"0.5\"/>\n",
                    left + s as f64 * bar,
                    bar,
                    (base - top).max(0.0),
                    PALETTE[s % PALETTE.len()]
                );
            }
            let _ = write!(
                out,
                "<text x=\"{:.1}\" y=\"{}\" font-size=\"12.5\" text-anchor=\"middle\" fill=\"#222\">{}</text>\n",
                frame.x(g as f64 + 0.5),
                HEIGHT - MARGIN_BOTTOM + 18.0,
                escape(group)
            );
        }
        let labels: Vec<&str> = self.series.iter().map(|(l, _)| l.as_str()).collect();
        legend(&mut out, &labels);
        out.push_str("</svg>\n");
        out
    }
}

/// Writes rendered SVG text to disk.
pub fn save(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg)?;
    Ok(())
}
