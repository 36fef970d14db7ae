//! Minimal native SVG line and scatter plots.

use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    /// `(x, y, half-width of the error bar)`.
    pub points: Vec<(f64, f64, f64)>,
    pub line: bool,
    pub markers: bool,
    pub dashed: bool,
}

impl Series {
    pub fn markers(label: impl Into<String>, points: Vec<(f64, f64, f64)>) -> Self {
        Series { label: label.into(), points, line: false, markers: true, dashed: false }
    }

    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        let points = points.into_iter().map(|(x, y)| (x, y, 0.0)).collect();
        Series { label: label.into(), points, line: true, markers: false, dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn tx(v: f64, s: Scale) -> f64 {
    match s {
        Scale::Linear => v,
        Scale::Log => v.log10(),
    }
}

fn usable(v: f64, s: Scale) -> bool {
    v.is_finite() && (s == Scale::Linear || v > 0.0)
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn ticks(lo: f64, hi: f64, s: Scale) -> Vec<f64> {
    if s == Scale::Log {
        let (a, b) = (lo.ceil() as i32, hi.floor() as i32);
        if b >= a {
            let step = ((b - a) / 6 + 1) as usize;
            return (a..=b).step_by(step).map(|k| k as f64).collect();
        }
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn label(v: f64, s: Scale) -> String {
    match s {
        Scale::Log => format!("1e{}", v.round() as i32),
        Scale::Linear => {
            let r = (v * 1e6).round() / 1e6;
            format!("{r}")
        }
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn render(&self) -> String {
        let xs = self.series.iter().flat_map(|s| s.points.iter()).filter(|p| usable(p.0, self.x_scale));
        let (x0, x1) = range(xs.map(|p| tx(p.0, self.x_scale)));
        let mut ys = Vec::new();
        for s in &self.series {
            for &(_, y, e) in &s.points {
                for v in [y - e, y, y + e] {
                    if usable(v, self.y_scale) {
                        ys.push(tx(v, self.y_scale));
                    }
                }
            }
        }
        let (y0, y1) = range(ys.into_iter());
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let px = |x: f64| LEFT + (tx(x, self.x_scale) - x0) / (x1 - x0) * pw;
        let py = |y: f64| TOP + ph - (tx(y, self.y_scale) - y0) / (y1 - y0) * ph;
        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(o, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(o, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, esc(&self.title));
        let _ = writeln!(o, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for t in ticks(x0, x1, self.x_scale) {
            let x = LEFT + (t - x0) / (x1 - x0) * pw;
            let _ = writeln!(o, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, TOP + ph);
            let _ = writeln!(o, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, label(t, self.x_scale));
        }
        for t in ticks(y0, y1, self.y_scale) {
            let y = TOP + ph - (t - y0) / (y1 - y0) * ph;
            let _ = writeln!(o, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw);
            let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, label(t, self.y_scale));
        }
        let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 14.0, esc(&self.x_label));
        let _ = writeln!(
            o,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let c = COLORS[i % COLORS.len()];
            let pts: Vec<_> =
                s.points.iter().filter(|p| usable(p.0, self.x_scale) && usable(p.1, self.y_scale)).collect();
            if s.line && pts.len() > 1 {
                let path: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1))).collect();
                let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let _ = writeln!(o, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"{dash}/>"#, path.join(" "));
            }
            if s.markers {
                for p in &pts {
                    let (x, y) = (px(p.0), py(p.1));
                    if p.2 > 0.0 {
                        let lo = if usable(p.1 - p.2, self.y_scale) { py(p.1 - p.2) } else { TOP + ph };
                        let _ = writeln!(o, r#"<line x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{:.2}" stroke="{c}"/>"#, py(p.1 + p.2));
                    }
                    let _ = writeln!(o, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{c}"/>"#);
                }
            }
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(o, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/>"#, lx + 18.0);
            let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 24.0, ly + 4.0, esc(&s.label));
        }
        o.push_str("</svg>\n");
        o
    }
}
