//! Static SVG figures of planar bodies and ellipses.

use std::fmt::Write;

use hilbund::linalg::{self, Matrix};

const PANEL: f64 = 240.0;
const MARGIN: f64 = 16.0;
const TITLE: f64 = 18.0;
const ELLIPSE_SEGMENTS: usize = 128;

/// How a shape is drawn; each maps to a fixed stroke style.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Body,
    Ellipse,
    Outer,
}

impl Style {
    fn attrs(self) -> &'static str {
        match self {
            Style::Body => r##"fill="#dde7f2" stroke="#2b4c7e" stroke-width="1.5""##,
            Style::Ellipse => r##"fill="none" stroke="#b5452b" stroke-width="1.5""##,
            Style::Outer => r##"fill="none" stroke="#555555" stroke-width="1" stroke-dasharray="4 3""##,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub polygons: Vec<(Vec<[f64; 2]>, Style)>,
    /// Gram matrices `Q` of ellipses `{x : xᵀQx ≤ 1}`.
    pub ellipses: Vec<([[f64; 2]; 2], Style)>,
}

impl Panel {
    pub fn new(title: impl Into<String>) -> Self {
        Panel {
            title: title.into(),
            polygons: Vec::new(),
            ellipses: Vec::new(),
        }
    }

    /// Adds the polygon with the given vertices of a body symmetric about
    /// the origin, ordered by angle.
    pub fn body(mut self, vertices: &[Vec<f64>], style: Style) -> Self {
        let mut pts: Vec<[f64; 2]> = vertices.iter().map(|v| [v[0], v[1]]).collect();
        pts.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
        self.polygons.push((pts, style));
        self
    }

    pub fn ellipse(mut self, gram: &Matrix, style: Style) -> Self {
        self.ellipses
            .push(([[gram[(0, 0)], gram[(0, 1)]], [gram[(1, 0)], gram[(1, 1)]]], style));
        self
    }

    fn outlines(&self) -> Vec<(Vec<[f64; 2]>, Style)> {
        let mut out = self.polygons.clone();
        for (g, style) in &self.ellipses {
            out.push((ellipse_points(g), *style));
        }
        out
    }
}

fn ellipse_points(g: &[[f64; 2]; 2]) -> Vec<[f64; 2]> {
    let q = Matrix::from_row_slice(2, 2, &[g[0][0], g[0][1], g[1][0], g[1][1]]);
    let (values, vectors) = linalg::sym_eigen(&q);
    let axes: Vec<f64> = values.iter().map(|l| 1.0 / l.max(1e-300).sqrt()).collect();
    (0..ELLIPSE_SEGMENTS)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / ELLIPSE_SEGMENTS as f64;
            let (s, c) = t.sin_cos();
            let x = vectors[(0, 0)] * axes[0] * c + vectors[(0, 1)] * axes[1] * s;
            let y = vectors[(1, 0)] * axes[0] * c + vectors[(1, 1)] * axes[1] * s;
            [x, y]
        })
        .collect()
}

/// Panels side by side, each scaled to fit its own contents. Coordinates
/// are printed with four decimals so the output is stable.
pub fn render(panels: &[Panel]) -> String {
    let width = (panels.len().max(1) as f64) * PANEL;
    let height = PANEL + TITLE;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    )
    .unwrap();
    for (i, panel) in panels.iter().enumerate() {
        let outlines = panel.outlines();
        let extent = outlines
            .iter()
            .flat_map(|(pts, _)| pts.iter().map(|p| p[0].abs().max(p[1].abs())))
            .fold(0.0f64, f64::max)
            .max(1e-12);
        let scale = (PANEL / 2.0 - MARGIN) / extent;
        let cx = i as f64 * PANEL + PANEL / 2.0;
        let cy = TITLE + PANEL / 2.0;
        writeln!(out, "  <g>").unwrap();
        writeln!(
            out,
            r#"    <text x="{:.4}" y="14" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            cx,
            escape(&panel.title)
        )
        .unwrap();
        for (pts, style) in outlines {
            let coords: Vec<String> = pts
                .iter()
                .map(|p| format!("{:.4},{:.4}", cx + p[0] * scale, cy - p[1] * scale))
                .collect();
            writeln!(out, r#"    <polygon points="{}" {}/>"#, coords.join(" "), style.attrs()).unwrap();
        }
        writeln!(out, "  </g>").unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_figure_is_valid() {
        let svg = render(&[]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("<polygon"));
    }

    #[test]
    fn square_and_circle() {
        let square = vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0]];
        let panel = Panel::new("square")
            .body(&square, Style::Body)
            .ellipse(&(Matrix::identity(2, 2) * 0.5), Style::Ellipse);
        let svg = render(std::slice::from_ref(&panel));
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert_eq!(svg, render(&[panel]));
    }

    #[test]
    fn ellipse_outline_lies_on_the_boundary() {
        let g = [[0.25, 0.0], [0.0, 0.5]];
        for p in ellipse_points(&g) {
            let q = g[0][0] * p[0] * p[0] + g[1][1] * p[1] * p[1];
            assert!((q - 1.0).abs() < 1e-12);
        }
    }
}
