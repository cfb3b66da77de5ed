//! Static SVG biplots. Output depends only on the map, so identical inputs
//! give byte-identical documents.

use std::fmt::Write;

use crate::ca::CoordinateMap;
use crate::error::{Result, SicaError};
use crate::table::Axis;

pub const SIZE: f64 = 800.0;
const MARGIN: f64 = 70.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders rows as circles and columns as squares on a common scale for
/// both axes, with the origin lines drawn in grey.
pub fn render_map(map: &CoordinateMap, title: &str) -> Result<String> {
    if map.points.is_empty() {
        return Err(SicaError::InvalidArgument("map has no points".into()));
    }
    if map
        .points
        .iter()
        .any(|p| !p.x.is_finite() || !p.y.is_finite())
    {
        return Err(SicaError::InvalidArgument(
            "map has non-finite coordinates".into(),
        ));
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&crate::ca::MapPoint) -> f64| {
        map.points.iter().map(sel).fold(init, f)
    };
    let (x0, x1) = (fold(f64::min, 0.0, |p| p.x), fold(f64::max, 0.0, |p| p.x));
    let (y0, y1) = (fold(f64::min, 0.0, |p| p.y), fold(f64::max, 0.0, |p| p.y));
    let span = (x1 - x0).max(y1 - y0).max(1e-12) * 1.05;
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let px = |x: f64| SIZE / 2.0 + (x - cx) * scale;
    let py = |y: f64| SIZE / 2.0 - (y - cy) * scale;

    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif">"#
    );
    let _ = writeln!(w, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="30" text-anchor="middle" font-size="18">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
    let _ = writeln!(
        w,
        r##"<line class="axis" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 4"/>"##,
        MARGIN / 2.0,
        py(0.0),
        SIZE - MARGIN / 2.0,
        py(0.0)
    );
    let _ = writeln!(
        w,
        r##"<line class="axis" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 4"/>"##,
        px(0.0),
        MARGIN / 2.0,
        px(0.0),
        SIZE - MARGIN / 2.0
    );
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="14">{}</text>"#,
        SIZE - 10.0,
        SIZE - 12.0,
        escape(&map.axis_titles.0)
    );
    let _ = writeln!(
        w,
        r#"<text x="20" y="{:.1}" font-size="14" transform="rotate(-90 20 {:.1})" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        SIZE / 2.0,
        escape(&map.axis_titles.1)
    );
    for p in &map.points {
        let (x, y) = (px(p.x), py(p.y));
        match p.axis {
            Axis::Row => {
                let _ = writeln!(
                    w,
                    r##"<circle class="row" cx="{x:.2}" cy="{y:.2}" r="4" fill="#1f5fa8"/>"##
                );
            }
            Axis::Column => {
                let _ = writeln!(
                    w,
                    r##"<rect class="col" x="{:.2}" y="{:.2}" width="8" height="8" fill="#b8322a"/>"##,
                    x - 4.0,
                    y - 4.0
                );
            }
        }
        let class = if p.axis == Axis::Row {
            "row-label"
        } else {
            "col-label"
        };
        let _ = writeln!(
            w,
            r#"<text class="{class}" x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            x + 6.0,
            y - 6.0,
            escape(&p.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
