//! Deterministic SVG rendering: correlation heatmaps, annotated scatter
//! plots, windowed line charts and morph frames.

use crate::analysis::{CorrelationMap, TimeSeries};
use crate::contour::Point;

/// Categorical palette; the gray at the end is reserved for missing values.
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];
const MISSING_COLOR: &str = "#999999";

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self { width, height, body: String::new() }
    }

    fn push(&mut self, element: String) {
        self.body.push_str("  ");
        self.body.push_str(&element);
        self.body.push('\n');
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        self.push(format!(
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"/>"#
        ));
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        self.push(format!(
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width:.2}"/>"#
        ));
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str, stroke: Option<&str>) {
        let stroke_attr = match stroke {
            Some(s) => format!(r#" stroke="{s}" stroke-width="1.2""#),
            None => String::new(),
        };
        self.push(format!(r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{fill}"{stroke_attr}/>"#));
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        self.push(format!(
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width:.2}"/>"#,
            coords.join(" ")
        ));
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, content: &str) {
        self.push(format!(
            r#"<text x="{x:.2}" y="{y:.2}" font-size="{size:.1}" font-family="sans-serif" text-anchor="{anchor}">{}</text>"#,
            esc(content)
        ));
    }

    fn text_rotated(&mut self, x: f64, y: f64, size: f64, angle: f64, content: &str) {
        self.push(format!(
            r#"<text x="{x:.2}" y="{y:.2}" font-size="{size:.1}" font-family="sans-serif" text-anchor="end" transform="rotate({angle:.0} {x:.2} {y:.2})">{}</text>"#,
            esc(content)
        ));
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {:.0} {:.0}\" width=\"{:.0}\" height=\"{:.0}\">\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

/// Blue-white-red diverging color for a coefficient in [-1, 1].
pub fn diverging_color(value: f64) -> String {
    let v = value.clamp(-1.0, 1.0);
    let lerp = |a: (u8, u8, u8), b: (u8, u8, u8), t: f64| -> (u8, u8, u8) {
        (
            (a.0 as f64 + (b.0 as f64 - a.0 as f64) * t).round() as u8,
            (a.1 as f64 + (b.1 as f64 - a.1 as f64) * t).round() as u8,
            (a.2 as f64 + (b.2 as f64 - a.2 as f64) * t).round() as u8,
        )
    };
    let blue = (33, 102, 172);
    let white = (247, 247, 247);
    let red = (178, 24, 43);
    let (r, g, b) = if v < 0.0 { lerp(white, blue, -v) } else { lerp(white, red, v) };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Correlation heatmap with row/column labels and a fixed [-1, 1] colorbar.
pub fn heatmap(map: &CorrelationMap) -> String {
    let n = map.labels.len();
    let cell = 26.0;
    let left = 70.0;
    let top = 70.0;
    let bar_w = 46.0;
    let width = left + n as f64 * cell + bar_w + 30.0;
    let height = top + n as f64 * cell + 20.0;
    let mut svg = Svg::new(width, height);

    for (j, row) in map.r.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            svg.rect(left + k as f64 * cell, top + j as f64 * cell, cell, cell, &diverging_color(v));
        }
    }
    for (j, label) in map.labels.iter().enumerate() {
        svg.text(left - 6.0, top + j as f64 * cell + cell * 0.68, 11.0, "end", label);
        svg.text_rotated(left + j as f64 * cell + cell * 0.68, top - 6.0, 11.0, -60.0, label);
    }
    // Colorbar, +1 at the top.
    let bar_x = left + n as f64 * cell + 18.0;
    let bar_h = n as f64 * cell;
    let steps = 64;
    for i in 0..steps {
        let v = 1.0 - 2.0 * i as f64 / (steps - 1) as f64;
        svg.rect(bar_x, top + bar_h * i as f64 / steps as f64, 16.0, bar_h / steps as f64 + 0.5, &diverging_color(v));
    }
    svg.text(bar_x + 20.0, top + 10.0, 10.0, "start", "+1");
    svg.text(bar_x + 20.0, top + bar_h / 2.0 + 4.0, 10.0, "start", "0");
    svg.text(bar_x + 20.0, top + bar_h, 10.0, "start", "-1");
    svg.finish()
}

fn nice_ticks(min: f64, max: f64, target: usize) -> Vec<f64> {
    if max <= min || !(min.is_finite() && max.is_finite()) {
        return vec![min];
    }
    let raw = (max - min) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (min / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = start;
    while t <= max + 1e-9 * step {
        ticks.push(t);
        t += step;
    }
    ticks
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.fract() == 0.0 && v.abs() < 1e7 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}")
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Frame {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.min_x) / (self.max_x - self.min_x);
        let fy = (y - self.min_y) / (self.max_y - self.min_y);
        (self.x0 + fx * self.w, self.y0 + self.h - fy * self.h)
    }

    fn draw_axes(&self, svg: &mut Svg, x_label: &str, y_label: &str) {
        svg.line(self.x0, self.y0 + self.h, self.x0 + self.w, self.y0 + self.h, "#333333", 1.0);
        svg.line(self.x0, self.y0, self.x0, self.y0 + self.h, "#333333", 1.0);
        for t in nice_ticks(self.min_x, self.max_x, 6) {
            let (px, _) = self.map(t, self.min_y);
            svg.line(px, self.y0 + self.h, px, self.y0 + self.h + 4.0, "#333333", 1.0);
            svg.text(px, self.y0 + self.h + 16.0, 10.0, "middle", &tick_label(t));
        }
        for t in nice_ticks(self.min_y, self.max_y, 6) {
            let (_, py) = self.map(self.min_x, t);
            svg.line(self.x0 - 4.0, py, self.x0, py, "#333333", 1.0);
            svg.text(self.x0 - 7.0, py + 3.5, 10.0, "end", &tick_label(t));
        }
        svg.text(self.x0 + self.w / 2.0, self.y0 + self.h + 34.0, 12.0, "middle", x_label);
        svg.text(self.x0 - 48.0, self.y0 - 10.0, 12.0, "start", y_label);
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if !min.is_finite() || !max.is_finite() {
        return (0.0, 1.0);
    }
    if min == max {
        return (min - 0.5, max + 0.5);
    }
    let pad = (max - min) * 0.06;
    (min - pad, max + pad)
}

/// Scatter of 2D scores colored by a categorical annotation (empty string =
/// missing). Categories are sorted for stable colors and legend order.
pub fn scatter(points: &[(f64, f64)], categories: &[String], title: &str, x_label: &str, y_label: &str) -> String {
    let mut svg = Svg::new(640.0, 480.0);
    let (min_x, max_x) = padded_range(points.iter().map(|p| p.0));
    let (min_y, max_y) = padded_range(points.iter().map(|p| p.1));
    let frame = Frame { x0: 64.0, y0: 40.0, w: 420.0, h: 380.0, min_x, max_x, min_y, max_y };
    frame.draw_axes(&mut svg, x_label, y_label);
    svg.text(frame.x0 + frame.w / 2.0, 22.0, 13.0, "middle", title);

    let mut names: Vec<&String> = categories.iter().filter(|c| !c.is_empty()).collect();
    names.sort();
    names.dedup();
    let color_of = |cat: &str| -> String {
        if cat.is_empty() {
            MISSING_COLOR.to_string()
        } else {
            let idx = names.iter().position(|n| n.as_str() == cat).unwrap();
            PALETTE[idx % PALETTE.len()].to_string()
        }
    };
    for ((x, y), cat) in points.iter().zip(categories) {
        let (px, py) = frame.map(*x, *y);
        svg.circle(px, py, 3.0, &color_of(cat), None);
    }
    // Legend.
    let lx = frame.x0 + frame.w + 18.0;
    let mut ly = frame.y0 + 8.0;
    for name in names.iter().take(14) {
        svg.circle(lx, ly - 3.5, 4.0, &color_of(name), None);
        svg.text(lx + 10.0, ly, 10.5, "start", name);
        ly += 16.0;
    }
    if categories.iter().any(|c| c.is_empty()) {
        svg.circle(lx, ly - 3.5, 4.0, MISSING_COLOR, None);
        svg.text(lx + 10.0, ly, 10.5, "start", "unknown");
    }
    svg.finish()
}

/// Line chart of one windowed series; gaps where windows are empty.
pub fn line_chart(ts: &TimeSeries, feature: &str, title: &str) -> String {
    let idx = ts.labels.iter().position(|l| l == feature);
    let mut svg = Svg::new(640.0, 400.0);
    let Some(idx) = idx else {
        svg.text(320.0, 200.0, 13.0, "middle", &format!("feature `{feature}` not present"));
        return svg.finish();
    };
    let series: Vec<(f64, Option<f64>)> = ts
        .center_years
        .iter()
        .zip(&ts.values)
        .map(|(&c, v)| (c, v.as_ref().map(|row| row[idx])))
        .collect();

    let (min_x, max_x) = padded_range(series.iter().map(|(c, _)| *c));
    let (min_y, max_y) = padded_range(series.iter().filter_map(|(_, v)| *v));
    let frame = Frame { x0: 70.0, y0: 40.0, w: 520.0, h: 300.0, min_x, max_x, min_y, max_y };
    frame.draw_axes(&mut svg, "window midpoint year", feature);
    svg.text(frame.x0 + frame.w / 2.0, 22.0, 13.0, "middle", title);

    let mut run: Vec<(f64, f64)> = Vec::new();
    for (c, v) in &series {
        match v {
            Some(v) => run.push(frame.map(*c, *v)),
            None => {
                if run.len() > 1 {
                    svg.polyline(&run, PALETTE[0], 1.6);
                }
                run.clear();
            }
        }
    }
    if run.len() > 1 {
        svg.polyline(&run, PALETTE[0], 1.6);
    } else if run.len() == 1 {
        svg.circle(run[0].0, run[0].1, 2.5, PALETTE[0], None);
    }
    svg.finish()
}

/// One morph frame: deformation grid, warped outline and landmark markers
/// (source hollow, target filled).
pub fn morph_frame(
    warped_contour: &[Point],
    grid: &[Vec<Point>],
    source_landmarks: &[Point],
    target_landmarks: &[Point],
    caption: &str,
) -> String {
    let mut svg = Svg::new(560.0, 640.0);
    let all = grid
        .iter()
        .flatten()
        .chain(warped_contour)
        .chain(source_landmarks)
        .chain(target_landmarks);
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for p in all {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let pad = 0.05 * (max_x - min_x).max(max_y - min_y).max(1e-9);
    let (min_x, max_x, min_y, max_y) = (min_x - pad, max_x + pad, min_y - pad, max_y + pad);
    // Image coordinates already have y pointing down; map without flipping.
    let scale = (520.0 / (max_x - min_x)).min(580.0 / (max_y - min_y));
    let map = |p: &Point| -> (f64, f64) {
        (20.0 + (p.x - min_x) * scale, 40.0 + (p.y - min_y) * scale)
    };

    for line in grid {
        let pts: Vec<(f64, f64)> = line.iter().map(&map).collect();
        svg.polyline(&pts, "#c8c8c8", 0.8);
    }
    let mut outline: Vec<(f64, f64)> = warped_contour.iter().map(&map).collect();
    if let Some(&first) = outline.first() {
        outline.push(first);
    }
    svg.polyline(&outline, "#111111", 1.6);
    for p in source_landmarks {
        let (x, y) = map(p);
        svg.circle(x, y, 4.0, "none", Some("#1f77b4"));
    }
    for p in target_landmarks {
        let (x, y) = map(p);
        svg.circle(x, y, 3.0, "#d62728", None);
    }
    svg.text(280.0, 24.0, 13.0, "middle", caption);
    svg.finish()
}
