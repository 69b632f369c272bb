//! Deterministic SVG scatter plots of labeled sweeps.
//!
//! Wirelength on x, temperature on y, one circle per point colored by
//! correlation level, the Pareto front as a polyline, and requested orders
//! highlighted with labeled diamonds. No timestamps or randomness: the same
//! inputs produce the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pareto::{pareto_front, LabeledScatter};
use crate::placer::fmt_sig6;
use crate::system::PlacementOrder;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 620.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 70.0;

/// Level palette, index 0 (far from the front) to 10 (on the front).
const LEVEL_COLORS: [&str; 11] = [
    "#2166ac", "#4393c3", "#74add1", "#abd9e9", "#c6dbef", "#bdbdbd", "#fdae61", "#f46d43",
    "#d73027", "#a50026", "#67001f",
];

struct AxisScale {
    min: f64,
    max: f64,
    span_px: f64,
    offset_px: f64,
    flip: bool,
}

impl AxisScale {
    fn new(values: impl Iterator<Item = f64>, span_px: f64, offset_px: f64, flip: bool) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() {
            min = 0.0;
            max = 1.0;
        }
        if max - min < 1e-12 {
            min -= 1.0;
            max += 1.0;
        } else {
            let pad = (max - min) * 0.05;
            min -= pad;
            max += pad;
        }
        AxisScale {
            min,
            max,
            span_px,
            offset_px,
            flip,
        }
    }

    fn map(&self, v: f64) -> f64 {
        let t = (v - self.min) / (self.max - self.min);
        let t = if self.flip { 1.0 - t } else { t };
        self.offset_px + t * self.span_px
    }

    fn ticks(&self, count: usize) -> Vec<f64> {
        (0..count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (count - 1) as f64)
            .collect()
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Render the scatter SVG and return it with the companion CSV body.
pub fn render_scatter(
    labeled: &LabeledScatter,
    highlights: &[PlacementOrder],
    title: &str,
) -> Result<(String, String)> {
    let points = &labeled.points.points;
    if points.is_empty() {
        return Err(Error::EmptyScatter);
    }
    let front = pareto_front(points)?;
    let highlighted: Vec<bool> = points
        .iter()
        .map(|p| highlights.contains(&p.order))
        .collect();

    let x = AxisScale::new(
        points.iter().map(|p| p.wirelength_mm),
        WIDTH - MARGIN_L - MARGIN_R,
        MARGIN_L,
        false,
    );
    let y = AxisScale::new(
        points.iter().map(|p| p.temperature_c),
        HEIGHT - MARGIN_T - MARGIN_B,
        MARGIN_T,
        true,
    );

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        px((MARGIN_L + WIDTH - MARGIN_R) / 2.0),
        xml_escape(title)
    );

    // Axes.
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = writeln!(
        svg,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        px(x0), px(y0), px(x1), px(y0)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        px(x0), px(y0), px(x0), px(y1)
    );
    for tick in x.ticks(5) {
        let tx = x.map(tick);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
            px(tx), px(y0), px(tx), px(y0 + 5.0)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            px(tx), px(y0 + 20.0), fmt_sig6(tick)
        );
    }
    for tick in y.ticks(5) {
        let ty = y.map(tick);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
            px(x0 - 5.0), px(ty), px(x0), px(ty)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            px(x0 - 9.0), px(ty + 4.0), fmt_sig6(tick)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">Total wirelength (mm)</text>"#,
        px((x0 + x1) / 2.0), px(HEIGHT - 22.0)
    );
    let _ = writeln!(
        svg,
        r#"<text x="22" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 22 {})">Peak temperature (&#176;C)</text>"#,
        px((y0 + y1) / 2.0), px((y0 + y1) / 2.0)
    );

    // Scatter points.
    for (i, p) in points.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<circle class="pt" cx="{}" cy="{}" r="3" fill="{}" fill-opacity="0.8"/>"#,
            px(x.map(p.wirelength_mm)),
            px(y.map(p.temperature_c)),
            LEVEL_COLORS[labeled.level[i] as usize]
        );
    }

    // Pareto front polyline, left to right.
    let mut front_sorted = front.clone();
    front_sorted.sort_by(|&a, &b| {
        points[a]
            .wirelength_mm
            .total_cmp(&points[b].wirelength_mm)
            .then(points[a].temperature_c.total_cmp(&points[b].temperature_c))
    });
    let vertices: Vec<String> = front_sorted
        .iter()
        .map(|&i| {
            format!(
                "{},{}",
                px(x.map(points[i].wirelength_mm)),
                px(y.map(points[i].temperature_c))
            )
        })
        .collect();
    let _ = writeln!(
        svg,
        r##"<polyline class="front" points="{}" fill="none" stroke="#333333" stroke-width="1.5" stroke-dasharray="5,3"/>"##,
        vertices.join(" ")
    );

    // Highlighted orders.
    for (i, p) in points.iter().enumerate() {
        if !highlighted[i] {
            continue;
        }
        let cx = x.map(p.wirelength_mm);
        let cy = y.map(p.temperature_c);
        let _ = writeln!(
            svg,
            r##"<path class="hl" d="M {} {} l 7 7 l -7 7 l -7 -7 z" fill="none" stroke="#000000" stroke-width="1.5"/>"##,
            px(cx), px(cy - 7.0)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="10">{}</text>"#,
            px(cx + 9.0),
            px(cy - 6.0),
            p.order
        );
    }

    // Level legend.
    let lx = WIDTH - MARGIN_R + 24.0;
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">level</text>"#,
        px(lx), px(MARGIN_T + 8.0)
    );
    for (l, color) in LEVEL_COLORS.iter().enumerate() {
        let ly = MARGIN_T + 22.0 + 16.0 * (10 - l) as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{}"/>"#,
            px(lx), px(ly), color
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            px(lx + 18.0), px(ly + 10.0), l
        );
    }
    let _ = writeln!(svg, "</svg>");

    // Companion CSV of exactly what was drawn.
    let mut csv = String::from("order,temperature_c,wirelength_mm,slack,level,highlighted\n");
    for (i, p) in points.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            p.order,
            fmt_sig6(p.temperature_c),
            fmt_sig6(p.wirelength_mm),
            fmt_sig6(labeled.slack[i]),
            labeled.level[i],
            u8::from(highlighted[i])
        );
    }
    Ok((svg, csv))
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Write the SVG to `path` and the companion CSV beside it.
pub fn emit_scatter_plot(
    labeled: &LabeledScatter,
    highlights: &[PlacementOrder],
    title: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let (svg, csv) = render_scatter(labeled, highlights, title)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path.display().to_string(), e))?;
    let csv_path = path.with_extension("csv");
    std::fs::write(&csv_path, csv).map_err(|e| Error::io(csv_path.display().to_string(), e))
}
