//! Minimal SVG charts. Output is a pure function of the inputs, with fixed
//! number formatting, so files are byte-stable across runs.

use std::fmt::Write as _;

use crate::nn::Activation;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (60.0, 200.0, 40.0, 50.0); // left, right, top, bottom
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let (l, r) = (MARGIN.0, WIDTH - MARGIN.1);
        l + (x - self.x.0) / (self.x.1 - self.x.0) * (r - l)
    }

    fn py(&self, y: f64) -> f64 {
        let (t, b) = (MARGIN.2, HEIGHT - MARGIN.3);
        b - (y - self.y.0) / (self.y.1 - self.y.0) * (b - t)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        (WIDTH - MARGIN.1 + MARGIN.0) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (l, r, t, b) = (MARGIN.0, WIDTH - MARGIN.1, MARGIN.2, HEIGHT - MARGIN.3);
    let _ = writeln!(out, r#"<rect x="{l:.1}" y="{t:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, r - l, b - t);
    // zero lines when inside the frame
    if f.x.0 < 0.0 && f.x.1 > 0.0 {
        let x = f.px(0.0);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{t:.1}" x2="{x:.2}" y2="{b:.1}" stroke="#999" stroke-dasharray="3,3"/>"##);
    }
    if f.y.0 < 0.0 && f.y.1 > 0.0 {
        let y = f.py(0.0);
        let _ = writeln!(out, r##"<line x1="{l:.1}" y1="{y:.2}" x2="{r:.1}" y2="{y:.2}" stroke="#999" stroke-dasharray="3,3"/>"##);
    }
    for k in 0..=4 {
        let xv = f.x.0 + (f.x.1 - f.x.0) * k as f64 / 4.0;
        let yv = f.y.0 + (f.y.1 - f.y.0) * k as f64 / 4.0;
        let (x, y) = (f.px(xv), f.py(yv));
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{b:.1}" x2="{x:.2}" y2="{:.1}" stroke="black"/>"#, b + 4.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{xv:.2}</text>"#, b + 17.0);
        let _ = writeln!(out, r#"<line x1="{:.1}" y1="{y:.2}" x2="{l:.1}" y2="{y:.2}" stroke="black"/>"#, l - 4.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{yv:.2}</text>"#, l - 6.0, y + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (l + r) / 2.0, HEIGHT - 12.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(y_label)
    );
}

/// Line chart with one `<path>` per curve and a legend on the right.
pub fn line_chart(title: &str, curves: &[Curve], x_label: &str, y_label: &str) -> String {
    let all = curves.iter().flat_map(|c| c.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all.filter(|(x, y)| x.is_finite() && y.is_finite()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let frame = Frame {
        x: if x1 > x0 { (x0, x1) } else { padded(x0, x1) },
        y: padded(y0, y1),
    };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, x_label, y_label);
    for (k, c) in curves.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        for (i, &(x, y)) in c.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, frame.px(x), frame.py(y));
        }
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="{colour}" stroke-width="2"/>"#);
        let ly = MARGIN.2 + 12.0 + 20.0 * k as f64;
        let lx = WIDTH - MARGIN.1 + 12.0;
        let _ = writeln!(out, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="3"/>"#, lx + 22.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#, lx + 28.0, ly + 4.0, escape(&c.label));
    }
    out.push_str("</svg>\n");
    out
}

/// The five activation functions plotted in the figure.
pub fn figure_activations() -> [(Activation, &'static str); 5] {
    [
        (Activation::Sigmoid, "sigmoid"),
        (Activation::Tanh, "hyperbolic tangent th(u)"),
        (Activation::Elu { a: 1.0 }, "ELU, a = 1"),
        (Activation::Relu { a: 0.1 }, "ReLU, a = 0.1"),
        (Activation::Selu { a: 1.67, b: 1.05 }, "SELU, a = 1.67, b = 1.05"),
    ]
}

pub fn activation_curves(points: usize) -> Vec<Curve> {
    figure_activations()
        .iter()
        .map(|&(act, label)| Curve {
            label: label.into(),
            points: (0..points)
                .map(|i| {
                    let u = -4.0 + 8.0 * i as f64 / (points - 1) as f64;
                    (u, act.apply(u))
                })
                .collect(),
        })
        .collect()
}

pub fn activations_svg() -> String {
    line_chart("Activation functions", &activation_curves(161), "u", "σ(u)")
}

/// Horizontal bar chart; an optional reference value is drawn as a dashed line.
pub fn bar_chart(title: &str, labels: &[String], values: &[f64], reference: Option<f64>) -> String {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(0.0f64, f64::min).min(reference.unwrap_or(0.0));
    let hi = finite.fold(0.0f64, f64::max).max(reference.unwrap_or(0.0));
    let frame = Frame {
        x: padded(lo, hi),
        y: (0.0, 1.0),
    };
    let mut out = String::new();
    header(&mut out, title);
    let (l, r, t, b) = (MARGIN.0 + 40.0, WIDTH - MARGIN.1 + 120.0, MARGIN.2, HEIGHT - MARGIN.3);
    let px = |x: f64| l + (x - frame.x.0) / (frame.x.1 - frame.x.0) * (r - l);
    let n = values.len().max(1) as f64;
    let band = (b - t) / n;
    for (k, (label, &v)) in labels.iter().zip(values).enumerate() {
        let y = t + band * k as f64;
        let (x0, x1) = if v >= 0.0 { (px(0.0), px(v)) } else { (px(v), px(0.0)) };
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#4c78a8"/>"##,
            y + 0.15 * band,
            (x1 - x0).max(0.0),
            0.7 * band
        );
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#, l - 6.0, y + 0.5 * band + 4.0, escape(label));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="10">{v:.4}</text>"#, x1.max(x0) + 4.0, y + 0.5 * band + 4.0);
    }
    let _ = writeln!(out, r#"<line x1="{:.2}" y1="{t:.1}" x2="{:.2}" y2="{b:.1}" stroke="black"/>"#, px(0.0), px(0.0));
    if let Some(rv) = reference {
        let x = px(rv);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{t:.1}" x2="{x:.2}" y2="{b:.1}" stroke="#d62728" stroke-dasharray="4,3"/>"##);
        let _ = writeln!(out, r##"<text x="{x:.2}" y="{:.1}" text-anchor="middle" fill="#d62728" font-size="10">baseline {rv:.4}</text>"##, b + 14.0);
    }
    out.push_str("</svg>\n");
    out
}
