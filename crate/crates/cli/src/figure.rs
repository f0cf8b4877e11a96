//! Drawable figure artifacts and their SVG 1.1 rendering.

use std::fmt::Write as _;

use billiard_core::geometry::{Oval, PolygonTable};
use billiard_core::Vec2;
use serde::{Deserialize, Serialize};

const FIGURE_KIND: &str = "figure";
const WIDTH_PX: f64 = 640.0;
const MARGIN: f64 = 0.06;
const OUTLINE_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    /// Table boundary or mirror.
    Table,
    /// Orbit polyline (chords, outer-billiard jumps, ray zigzags).
    Orbit,
    Caustic,
    /// Isolated markers at cusps.
    Cusp,
    /// Isolated orbit points.
    Points,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub style: Style,
    #[serde(default)]
    pub closed: bool,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure {
    pub kind: String,
    pub title: String,
    /// Viewport `[xmin, ymin, xmax, ymax]`; defaults to the table layers plus a margin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<[f64; 4]>,
    pub layers: Vec<Layer>,
}

impl Figure {
    pub fn new(title: impl Into<String>) -> Self {
        Figure { kind: FIGURE_KIND.to_string(), title: title.into(), frame: None, layers: Vec::new() }
    }

    pub fn is_figure(&self) -> bool {
        self.kind == FIGURE_KIND
    }

    pub fn push(&mut self, style: Style, closed: bool, points: impl IntoIterator<Item = Vec2>) {
        let points: Vec<[f64; 2]> = points.into_iter().filter(|p| p.x.is_finite() && p.y.is_finite()).map(|p| p.to_array()).collect();
        if !points.is_empty() {
            self.layers.push(Layer { style, closed, points });
        }
    }

    pub fn push_oval(&mut self, oval: &Oval) {
        let pts = (0..OUTLINE_SAMPLES).map(|i| oval.position(std::f64::consts::TAU * i as f64 / OUTLINE_SAMPLES as f64));
        self.push(Style::Table, true, pts);
    }

    pub fn push_polygon(&mut self, poly: &PolygonTable) {
        self.push(Style::Table, true, poly.vertices().iter().copied());
    }

    /// Bounding box `[xmin, ymin, xmax, ymax]` of the table layers, or of everything when
    /// there are none.
    fn bounds(&self) -> [f64; 4] {
        if let Some(f) = self.frame {
            if f[0] < f[2] && f[1] < f[3] {
                return f;
            }
        }
        let tables: Vec<&Layer> = self.layers.iter().filter(|l| l.style == Style::Table).collect();
        let layers: Vec<&Layer> = if tables.is_empty() { self.layers.iter().collect() } else { tables };
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for p in layers.iter().flat_map(|l| &l.points) {
            b = [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])];
        }
        if !b[0].is_finite() {
            return [-1.0, -1.0, 1.0, 1.0];
        }
        let pad = MARGIN * (b[2] - b[0]).max(b[3] - b[1]).max(1e-9);
        [b[0] - pad, b[1] - pad, b[2] + pad, b[3] + pad]
    }

    /// SVG 1.1 document; y points up, coordinates are written with fixed precision so the
    /// bytes only depend on the figure.
    pub fn to_svg(&self) -> String {
        let [x0, y0, x1, y1] = self.bounds();
        let (w, h) = (x1 - x0, y1 - y0);
        let height_px = (WIDTH_PX * h / w).clamp(64.0, 4.0 * WIDTH_PX);
        let unit = w / WIDTH_PX;
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH_PX:.0}" height="{height_px:.0}" viewBox="{} {} {} {}" preserveAspectRatio="xMidYMid meet">"#,
            fmt(x0),
            fmt(-y1),
            fmt(w),
            fmt(h)
        );
        let _ = writeln!(out, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(out, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#, fmt(x0), fmt(-y1), fmt(w), fmt(h));
        for layer in &self.layers {
            let (stroke, width, opacity) = match layer.style {
                Style::Table => ("black", 1.6, 1.0),
                Style::Orbit => ("#1f5fbf", 0.5, 0.6),
                Style::Caustic => ("#c0392b", 1.2, 1.0),
                Style::Cusp | Style::Points => ("#2e7d32", 0.0, 1.0),
            };
            match layer.style {
                Style::Cusp | Style::Points => {
                    let r = if layer.style == Style::Cusp { 3.0 * unit } else { 1.2 * unit };
                    let _ = writeln!(out, r#"<g fill="{stroke}">"#);
                    for p in &layer.points {
                        let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{}"/>"#, fmt(p[0]), fmt(-p[1]), fmt(r));
                    }
                    let _ = writeln!(out, "</g>");
                }
                _ => {
                    let tag = if layer.closed { "polygon" } else { "polyline" };
                    let pts: Vec<String> = layer.points.iter().map(|p| format!("{},{}", fmt(p[0]), fmt(-p[1]))).collect();
                    let _ = writeln!(
                        out,
                        r#"<{tag} fill="none" stroke="{stroke}" stroke-width="{}" stroke-opacity="{opacity}" stroke-linejoin="round" points="{}"/>"#,
                        fmt(width * unit),
                        pts.join(" ")
                    );
                }
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Split a sampled curve into runs of defined points, breaking where consecutive points jump
/// by more than `max_jump` (the curve passing through infinity).
pub fn runs(points: &[Option<Vec2>], max_jump: f64) -> Vec<Vec<Vec2>> {
    let mut out: Vec<Vec<Vec2>> = Vec::new();
    let mut current: Vec<Vec2> = Vec::new();
    for p in points {
        match p {
            Some(p) if current.last().is_none_or(|q| q.distance(*p) <= max_jump) => current.push(*p),
            Some(p) => {
                out.push(std::mem::take(&mut current));
                current.push(*p);
            }
            None => {
                if !current.is_empty() {
                    out.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out.retain(|r| r.len() > 1);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_deterministic_and_flips_y() {
        let mut fig = Figure::new("circle & <orbit>");
        fig.push_oval(&Oval::circle(1.0).unwrap());
        fig.push(Style::Orbit, false, [Vec2::new(0.0, 0.5), Vec2::new(0.5, 0.0)]);
        fig.push(Style::Cusp, false, [Vec2::new(0.2, 0.3)]);
        let svg = fig.to_svg();
        assert_eq!(svg, fig.to_svg());
        assert!(svg.contains("circle &amp; &lt;orbit&gt;"));
        assert!(svg.contains("0.000000,-0.500000 0.500000,0.000000"));
        assert!(svg.contains(r#"cy="-0.300000""#));
    }

    #[test]
    fn runs_break_at_gaps_and_jumps() {
        let p = |x: f64| Some(Vec2::new(x, 0.0));
        let r = runs(&[p(0.0), p(0.1), None, p(0.2), p(0.3), p(5.0), p(5.1)], 1.0);
        assert_eq!(r.len(), 3);
    }
}
