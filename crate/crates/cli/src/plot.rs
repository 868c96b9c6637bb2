//! Line charts as plain SVG.

use std::fmt::Write;

use marketsched::harness::SeriesTable;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// A labelled table, usually one per input file.
pub struct Input<'a> {
    pub label: String,
    pub table: &'a SeriesTable,
}

struct Line {
    legend: String,
    points: Vec<(f64, Option<(f64, Option<f64>)>)>,
}

fn y_label(lines: &[Line]) -> &'static str {
    let all = |p: &str| lines.iter().all(|l| l.legend.split(": ").last().is_some_and(|s| s.starts_with(p)));
    if lines.is_empty() {
        "value"
    } else if all("ntat") {
        "NTAT"
    } else if all("price") {
        "price"
    } else {
        "value"
    }
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders every series of every input whose name contains `filter`.
pub fn render(inputs: &[Input], filter: Option<&str>) -> String {
    let mut lines = Vec::new();
    for input in inputs {
        for name in input.table.series_names() {
            if filter.is_some_and(|f| !name.contains(f)) {
                continue;
            }
            let points = input.table.rows_of(name).map(|r| (r.step as f64, r.value.map(|v| (v, r.std)))).collect();
            lines.push(Line { legend: format!("{}: {name}", input.label), points });
        }
    }

    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for l in &lines {
        for &(x, v) in &l.points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            if let Some((y, std)) = v {
                let s = std.unwrap_or(0.0);
                y0 = y0.min(y - s);
                y1 = y1.max(y + s);
            }
        }
    }
    let (x0, x1) = nice_range(x0, x1);
    let (y0, y1) = nice_range(y0, y1);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    for i in 0..=4 {
        let f = f64::from(i) / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(xv), HEIGHT - BOTTOM + 16.0, fmt_tick(xv)).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, sy(yv) + 4.0, fmt_tick(yv)).unwrap();
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">step</text>"#, LEFT + pw / 2.0, HEIGHT - 12.0).unwrap();
    writeln!(s, r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#, TOP + ph / 2.0, TOP + ph / 2.0, y_label(&lines)).unwrap();

    for (i, l) in lines.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for seg in segments(&l.points) {
            if seg.iter().any(|p| p.2.is_some()) {
                let mut poly = String::new();
                for &(x, y, std) in &seg {
                    write!(poly, "{:.2},{:.2} ", sx(x), sy(y + std.unwrap_or(0.0))).unwrap();
                }
                for &(x, y, std) in seg.iter().rev() {
                    write!(poly, "{:.2},{:.2} ", sx(x), sy(y - std.unwrap_or(0.0))).unwrap();
                }
                writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, poly.trim_end()).unwrap();
            }
            let pts: Vec<String> = seg.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" ")).unwrap();
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        writeln!(s, r#"<line x1="{lx}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#, ly - 4.0, lx + 18.0, ly - 4.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{ly:.2}">{}</text>"#, lx + 24.0, esc(&l.legend)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Runs of consecutive present points.
fn segments(points: &[(f64, Option<(f64, Option<f64>)>)]) -> Vec<Vec<(f64, f64, Option<f64>)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for &(x, v) in points {
        match v {
            Some((y, std)) => cur.push((x, y, std)),
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}
