//! Minimal SVG output: line plots and nodal-line overlays on the disk.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::geometry::BoundaryPartition;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Horizontal reference lines with labels.
    pub references: Vec<(String, f64)>,
}

impl LinePlot {
    pub fn to_svg(&self) -> String {
        let (w, h, m) = (720.0, 480.0, 60.0);
        let pts = self.series.iter().flat_map(|s| s.points.iter().copied());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in pts.chain(self.references.iter().map(|r| (f64::NAN, r.1))) {
            if x.is_finite() {
                x0 = x0.min(x);
                x1 = x1.max(x);
            }
            if y.is_finite() {
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        if !(x1 > x0) {
            x1 = x0 + 1.0;
        }
        if !(y1 > y0) {
            y1 = y0 + 1.0;
        }
        let pad = 0.05 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
        let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, w / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            w - 2.0 * m,
            h - 2.0 * m
        );
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(fx), h - m + 16.0, tick(fx));
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, m - 6.0, sy(fy) + 4.0, tick(fy));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 14.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            h / 2.0,
            h / 2.0,
            escape(&self.y_label)
        );
        for (label, y) in &self.references {
            let _ = writeln!(
                s,
                r#"<line x1="{m}" x2="{}" y1="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/><text x="{}" y="{:.2}" text-anchor="end" fill="gray">{}</text>"#,
                w - m,
                sy(*y),
                sy(*y),
                w - m - 4.0,
                sy(*y) - 4.0,
                escape(label)
            );
        }
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = series
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                m + 10.0,
                m + 16.0 + 16.0 * i as f64,
                escape(&series.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Unit disk with Dirichlet arcs drawn thick and nodal segments overlaid.
pub fn nodal_overlay_svg(title: &str, partition: Option<&BoundaryPartition>, dirichlet_everywhere: bool, segments: &[[[f64; 2]; 2]]) -> String {
    let size = 400.0;
    let c = size / 2.0;
    let r = size * 0.42;
    let map = |p: [f64; 2]| (c + r * p[0], c - r * p[1]);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{size}" height="{size}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{c}" y="16" text-anchor="middle">{}</text>"#, escape(title));
    let _ = writeln!(s, r#"<circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="gray"/>"#);
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    if dirichlet_everywhere {
        arcs.push((0.0, TAU));
    } else if let Some(p) = partition {
        arcs.extend(p.arcs().iter().map(|a| (a.start().to_radians(), a.length().to_radians())));
    }
    for (start, len) in arcs {
        let steps = ((len / 0.02).ceil() as usize).max(2);
        let pts: Vec<String> = (0..=steps)
            .map(|i| {
                let t = start + len * i as f64 / steps as f64;
                let (x, y) = map([t.cos(), t.sin()]);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="black" stroke-width="4" points="{}"/>"#, pts.join(" "));
    }
    for seg in segments {
        let (ax, ay) = map(seg[0]);
        let (bx, by) = map(seg[1]);
        let _ = writeln!(s, r##"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="#d62728" stroke-width="1.5"/>"##);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_well_formed() {
        let plot = LinePlot {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                name: "s".into(),
                points: vec![(0.0, 1.0), (1.0, 2.0)],
            }],
            references: vec![("ref".into(), 1.5)],
        };
        let svg = plot.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
