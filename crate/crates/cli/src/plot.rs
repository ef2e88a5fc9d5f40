//! Minimal standalone SVG line charts.

use std::fmt::Write as _;

use crate::output::Series;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Single polyline with axis labels and the data range at the corners.
pub fn line_chart_svg(series: &Series) -> String {
    let pts: Vec<(f64, f64)> = series.points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {b} H{r} M{m} {b} V{m}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    let mut d = String::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, sx(x), sy(y));
    }
    let _ = writeln!(s, r#"<path d="{}" stroke="steelblue" stroke-width="1.5" fill="none"/>"#, d.trim_end());
    let text = |s: &mut String, x: f64, y: f64, anchor: &str, t: &str| {
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" font-size="12" font-family="sans-serif" text-anchor="{anchor}">{}</text>"#, escape(t));
    };
    text(&mut s, W / 2.0, 20.0, "middle", &series.name);
    text(&mut s, W / 2.0, H - 15.0, "middle", &series.x_label);
    text(&mut s, 15.0, H / 2.0, "start", &series.y_label);
    text(&mut s, MARGIN, H - MARGIN + 15.0, "start", &format!("{x0:.4e}"));
    text(&mut s, W - MARGIN, H - MARGIN + 15.0, "end", &format!("{x1:.4e}"));
    text(&mut s, MARGIN - 5.0, H - MARGIN, "end", &format!("{y0:.4e}"));
    text(&mut s, MARGIN - 5.0, MARGIN, "end", &format!("{y1:.4e}"));
    s.push_str("</svg>\n");
    s
}
