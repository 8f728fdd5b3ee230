//! Minimal SVG rendering: heatmaps, bar charts and line charts.
//!
//! Every element that encodes a data value carries it in a `data-value`
//! attribute so tests can compare an image with its CSV.

use std::fmt::Write;

use varlab_core::variability::SurfaceField;

const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// A drawing of fixed size, either standalone or embedded in a larger one.
#[derive(Debug, Clone)]
pub struct Svg {
    pub width: f64,
    pub height: f64,
    body: String,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Svg {
            width,
            height,
            body: String::new(),
        }
    }

    /// Complete document.
    pub fn finish(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }

    fn embed(&self, x: f64, y: f64) -> String {
        format!(
            "<svg x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" {FONT}>{}</text>",
            escape(s)
        );
    }
}

/// Panels laid out row-major in a grid of `cols` columns.
pub fn grid(panels: &[Svg], cols: usize) -> Svg {
    let cols = cols.max(1);
    let cell_w = panels.iter().map(|p| p.width).fold(0.0, f64::max);
    let cell_h = panels.iter().map(|p| p.height).fold(0.0, f64::max);
    let rows = panels.len().div_ceil(cols);
    let mut out = Svg::new(cell_w * cols as f64, cell_h * rows as f64);
    for (k, p) in panels.iter().enumerate() {
        out.body.push_str(&p.embed((k % cols) as f64 * cell_w, (k / cols) as f64 * cell_h));
    }
    out
}

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Blue-to-yellow ramp for `t` in `[0, 1]`.
fn ramp(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(40.0, 250.0), lerp(20.0, 230.0), lerp(120.0, 30.0))
}

/// Heatmap of a field with `x` to the right and `y` upwards.
pub fn heatmap(field: &SurfaceField, title: &str) -> Svg {
    let n = field.grid.n;
    let cell = (240.0 / n as f64).max(1.0);
    let top = 20.0;
    let mut svg = Svg::new(cell * n as f64 + 10.0, cell * n as f64 + top + 10.0);
    svg.text(svg.width / 2.0, 14.0, "middle", title);
    let (lo, hi) = (field.min(), field.max());
    let span = if hi > lo { hi - lo } else { 1.0 };
    for i in 0..n {
        for j in 0..n {
            let v = field.at(i, j);
            let x = 5.0 + i as f64 * cell;
            let y = top + (n - 1 - j) as f64 * cell;
            let _ = writeln!(
                svg.body,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{c:.2}\" height=\"{c:.2}\" fill=\"{}\" data-value=\"{v:e}\"/>",
                ramp((v - lo) / span),
                c = cell
            );
        }
    }
    svg
}

struct Frame {
    left: f64,
    top: f64,
    w: f64,
    h: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.h - (y - self.y.0) / (self.y.1 - self.y.0) * self.h
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn axes(svg: &mut Svg, f: &Frame, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        svg.body,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>",
        f.left, f.top, f.w, f.h
    );
    svg.text(f.left + f.w / 2.0, 14.0, "middle", title);
    svg.text(f.left + f.w / 2.0, f.top + f.h + 32.0, "middle", x_label);
    let _ = writeln!(
        svg.body,
        "<text x=\"12\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 12 {:.1})\" {FONT}>{}</text>",
        f.top + f.h / 2.0,
        f.top + f.h / 2.0,
        escape(y_label)
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        svg.text(f.px(xv), f.top + f.h + 14.0, "middle", &tick(xv));
        svg.text(f.left - 4.0, f.py(yv) + 4.0, "end", &tick(yv));
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

/// One curve of a line chart; non-finite points break the line.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Svg {
    let mut svg = Svg::new(460.0, 300.0);
    let finite = || series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (xmin, xmax) = finite().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (ymin, ymax) = finite().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let f = Frame {
        left: 60.0,
        top: 24.0,
        w: 280.0,
        h: 220.0,
        x: padded(xmin, xmax),
        y: padded(ymin, ymax),
    };
    axes(&mut svg, &f, title, x_label, y_label);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut segment: Vec<String> = Vec::new();
        let flush = |segment: &mut Vec<String>, body: &mut String| {
            if segment.len() > 1 {
                let _ = writeln!(
                    body,
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"/>",
                    segment.join(" ")
                );
            }
            segment.clear();
        };
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                segment.push(format!("{:.2},{:.2}", f.px(x), f.py(y)));
                let _ = writeln!(
                    svg.body,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.2\" fill=\"{color}\" data-x=\"{x:e}\" data-value=\"{y:e}\"/>",
                    f.px(x),
                    f.py(y)
                );
            } else {
                flush(&mut segment, &mut svg.body);
            }
        }
        flush(&mut segment, &mut svg.body);
        let ly = f.top + 12.0 + 14.0 * k as f64;
        let _ = writeln!(
            svg.body,
            "<line x1=\"350\" y1=\"{:.1}\" x2=\"366\" y2=\"{:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            ly - 4.0,
            ly - 4.0
        );
        svg.text(370.0, ly, "start", &s.name);
    }
    svg
}

/// Vertical bars, one per label.
pub fn bar_chart(title: &str, x_label: &str, y_label: &str, bars: &[(String, f64)]) -> Svg {
    let mut svg = Svg::new(460.0, 300.0);
    let ymax = bars.iter().map(|b| b.1).filter(|v| v.is_finite()).fold(0.0, f64::max);
    let f = Frame {
        left: 60.0,
        top: 24.0,
        w: 380.0,
        h: 220.0,
        x: (0.0, bars.len().max(1) as f64),
        y: (0.0, if ymax > 0.0 { ymax * 1.05 } else { 1.0 }),
    };
    let _ = writeln!(
        svg.body,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>",
        f.left, f.top, f.w, f.h
    );
    svg.text(f.left + f.w / 2.0, 14.0, "middle", title);
    svg.text(f.left + f.w / 2.0, f.top + f.h + 32.0, "middle", x_label);
    svg.text(f.left - 4.0, f.top + 4.0, "end", &tick(f.y.1));
    svg.text(f.left - 4.0, f.top + f.h, "end", "0");
    svg.text(14.0, f.top - 6.0, "start", y_label);
    let slot = f.w / bars.len().max(1) as f64;
    for (k, (label, v)) in bars.iter().enumerate() {
        let height = if v.is_finite() { (v / f.y.1 * f.h).max(0.0) } else { 0.0 };
        let x = f.left + k as f64 * slot + 0.15 * slot;
        let _ = writeln!(
            svg.body,
            "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{height:.2}\" fill=\"{}\" data-value=\"{v:e}\"/>",
            f.top + f.h - height,
            0.7 * slot,
            PALETTE[0]
        );
        svg.text(x + 0.35 * slot, f.top + f.h + 14.0, "middle", label);
    }
    svg
}
