use std::fmt::Write as _;

use crate::levelgeom::LevelSetReport;
use crate::ring::AnnularGrid;

const BOUNDARY_SAMPLES: usize = 360;
const CANVAS: f64 = 800.0;
const POSITIVE: &str = "#1f5fbf";
const NEGATIVE: &str = "#c0281e";

/// Polyline with curvature, header `x,y,kappa`.
pub fn level_csv(report: &LevelSetReport) -> String {
    let mut out = String::from("x,y,kappa\n");
    for (p, k) in report.polyline.iter().zip(&report.curvature) {
        let _ = writeln!(out, "{},{},{}", p[0], p[1], k);
    }
    out
}

fn points_attr(points: &[[f64; 2]]) -> String {
    let mut s = String::new();
    for (k, p) in points.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.6},{:.6}", p[0], p[1]);
    }
    s
}

/// Boundaries in black and level curves split into runs of constant
/// curvature sign, blue for convex and red otherwise. The y axis points up.
pub fn levels_svg(grid: &AnnularGrid, reports: &[LevelSetReport]) -> String {
    let ring = grid.ring();
    let outer = ring.outer().samples(BOUNDARY_SAMPLES);
    let inner = ring.inner().samples(BOUNDARY_SAMPLES);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &outer {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let pad = 0.05 * span;
    let scale = CANVAS / (span + 2.0 * pad);
    let map = |p: &[f64; 2]| [(p[0] - lo[0] + pad) * scale, (hi[1] - p[1] + pad) * scale];
    let width = (hi[0] - lo[0] + 2.0 * pad) * scale;
    let height = (hi[1] - lo[1] + 2.0 * pad) * scale;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (name, curve) in [("outer", &outer), ("inner", &inner)] {
        let mapped: Vec<[f64; 2]> = curve.iter().map(map).collect();
        let _ = writeln!(
            svg,
            r#"<polygon class="boundary {name}" points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
            points_attr(&mapped)
        );
    }
    for rep in reports {
        let _ = writeln!(svg, r#"<g class="level" data-level="{}">"#, rep.level);
        let pts: Vec<[f64; 2]> = rep.polyline.iter().map(map).collect();
        let mut start = 0;
        while start + 1 < pts.len() {
            let convex = rep.curvature[start] > 0.0;
            let mut end = start + 1;
            while end + 1 < pts.len() && (rep.curvature[end] > 0.0) == convex {
                end += 1;
            }
            let colour = if convex { POSITIVE } else { NEGATIVE };
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
                points_attr(&pts[start..=end])
            );
            start = end;
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}
