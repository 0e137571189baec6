//! Marching squares on the `(s, θ)` grid, periodic in θ.

use std::collections::HashMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{level_curvature, DEFAULT_GRAD_FLOOR};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::spaceform::PointJet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub level: f64,
    /// Closed polyline; the last point repeats the first.
    pub polyline: Vec<[f64; 2]>,
    /// Curvature with respect to `∇u/|∇u|` at each polyline point.
    pub curvature: Vec<f64>,
    pub min_curvature: f64,
    pub max_curvature: f64,
    pub min_gradient_on_level: f64,
    /// Closed components found; a ring level set has exactly one.
    pub components: usize,
}

/// Crossing of an edge: radial edges join `(i, j)`–`(i+1, j)`, angular edges
/// `(i, j)`–`(i, j+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Edge {
    Radial(usize, usize),
    Angular(usize, usize),
}

/// Jets at all nodes, row-major, boundary rows included.
pub fn node_jets(field: &ScalarField) -> Result<Vec<PointJet>> {
    let g = field.grid();
    let nt = g.ntheta();
    let (outer, inner) = field.boundary_jets()?;
    let mut jets = outer;
    jets.reserve(g.len() - nt);
    jets.extend(field.interior_jets()?);
    jets.extend(inner);
    Ok(jets)
}

pub fn extract_level(field: &ScalarField, level: f64) -> Result<LevelSetReport> {
    extract_level_with_jets(field, &node_jets(field)?, level)
}

/// Level extraction reusing precomputed [`node_jets`].
pub fn extract_level_with_jets(field: &ScalarField, jets: &[PointJet], level: f64) -> Result<LevelSetReport> {
    let g = field.grid();
    let (ns, nt) = (g.ns(), g.ntheta());
    let (outer, inner) = field.boundary_values();
    let (low, high) = (outer.min(inner), outer.max(inner));
    if !(level > low && level < high) {
        return Err(Error::LevelOutOfRange { level, low, high });
    }
    let above = |i: usize, j: usize| field.get(i, j) >= level;
    let crosses = |e: Edge| match e {
        Edge::Radial(i, j) => above(i, j) != above(i + 1, j),
        Edge::Angular(i, j) => above(i, j) != above(i, (j + 1) % nt),
    };
    // Segments as pairs of edges, cell by cell.
    let mut adjacency: HashMap<Edge, Vec<Edge>> = HashMap::new();
    let mut link = |a: Edge, b: Edge| {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    };
    for i in 0..ns {
        for j in 0..nt {
            let jp = (j + 1) % nt;
            // Cell edges in cyclic order.
            let edges = [Edge::Angular(i, j), Edge::Radial(i, jp), Edge::Angular(i + 1, j), Edge::Radial(i, j)];
            let hit: Vec<Edge> = edges.iter().copied().filter(|&e| crosses(e)).collect();
            match hit.len() {
                0 => {}
                2 => link(hit[0], hit[1]),
                4 => {
                    let centre = 0.25 * (field.get(i, j) + field.get(i + 1, j) + field.get(i, jp) + field.get(i + 1, jp));
                    // Corner (i, j) sits between edges 3 and 0.
                    if (centre >= level) == above(i, j) {
                        link(edges[0], edges[1]);
                        link(edges[2], edges[3]);
                    } else {
                        link(edges[3], edges[0]);
                        link(edges[1], edges[2]);
                    }
                }
                _ => unreachable!("a cell has an even number of crossings"),
            }
        }
    }
    // Chain into loops, deterministic by edge order.
    let mut keys: Vec<Edge> = adjacency.keys().copied().collect();
    keys.sort_by_key(|e| match *e {
        Edge::Radial(i, j) => (j, 0, i),
        Edge::Angular(i, j) => (j, 1, i),
    });
    let mut visited: HashMap<Edge, bool> = HashMap::new();
    let mut loops: Vec<Vec<Edge>> = Vec::new();
    for &start in &keys {
        if visited.contains_key(&start) {
            continue;
        }
        let mut path = vec![start];
        visited.insert(start, true);
        let mut prev = start;
        let mut cur = adjacency[&start][0];
        while cur != start {
            if visited.contains_key(&cur) {
                return Err(Error::Topology(format!("level {level} contour is not a simple closed curve")));
            }
            visited.insert(cur, true);
            path.push(cur);
            let nbrs = &adjacency[&cur];
            if nbrs.len() != 2 {
                return Err(Error::Topology(format!("open contour at level {level}")));
            }
            let next = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
            prev = cur;
            cur = next;
        }
        loops.push(path);
    }
    let components = loops.len();
    let crossing = |e: Edge| -> (f64, f64, usize, usize, f64) {
        let ((i0, j0), (i1, j1)) = match e {
            Edge::Radial(i, j) => ((i, j), (i + 1, j)),
            Edge::Angular(i, j) => ((i, j), (i, (j + 1) % nt)),
        };
        let (a, b) = (field.get(i0, j0), field.get(i1, j1));
        let t = (level - a) / (b - a);
        let s = g.s(i0) + t * (g.s(i1) - g.s(i0));
        let theta = match e {
            Edge::Radial(_, j) => g.theta(j),
            Edge::Angular(_, j) => g.theta(j) + t * g.dtheta(),
        };
        (s, theta, g.index(i0, j0), g.index(i1, j1), t)
    };
    // The component around the hole winds once in θ.
    let winding = |path: &[Edge]| -> f64 {
        let th: Vec<f64> = path.iter().map(|&e| crossing(e).1).collect();
        let mut total = 0.0;
        for k in 0..th.len() {
            let mut d = th[(k + 1) % th.len()] - th[k];
            d -= TAU * (d / TAU).round();
            total += d;
        }
        total
    };
    let main: Vec<(Vec<Edge>, f64)> =
        loops.into_iter().map(|p| (p.clone(), winding(&p))).filter(|(_, w)| (w.abs() - TAU).abs() < 1e-6).collect();
    let (mut path, w) = match main.len() {
        1 => main.into_iter().next().expect("one loop"),
        0 => return Err(Error::Topology(format!("no closed level curve around the hole at level {level}"))),
        k => return Err(Error::Topology(format!("{k} level curves wind around the hole at level {level}"))),
    };
    if w < 0.0 {
        path.reverse();
    }
    // Start at the smallest θ.
    let start = (0..path.len())
        .min_by(|&a, &b| crossing(path[a]).1.total_cmp(&crossing(path[b]).1))
        .unwrap_or(0);
    path.rotate_left(start);

    let mut polyline = Vec::with_capacity(path.len() + 1);
    let mut curvature = Vec::with_capacity(path.len() + 1);
    let mut min_grad = f64::INFINITY;
    for &e in &path {
        let (s, theta, a, b, t) = crossing(e);
        polyline.push(g.map(s, theta));
        let jet = jets[a].lerp(&jets[b], t);
        min_grad = min_grad.min(jet.grad_norm());
        curvature.push(level_curvature(&jet, DEFAULT_GRAD_FLOOR)?);
    }
    polyline.push(polyline[0]);
    curvature.push(curvature[0]);
    let min_curvature = curvature.iter().copied().fold(f64::INFINITY, f64::min);
    let max_curvature = curvature.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(LevelSetReport {
        level,
        polyline,
        curvature,
        min_curvature,
        max_curvature,
        min_gradient_on_level: min_grad,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{build_grid, AnnularGrid, ConvexRing, CurveSpec};
    use crate::spaceform::SpaceFormChart;
    use std::sync::Arc;

    fn circles(n: usize) -> Arc<AnnularGrid> {
        let ring = ConvexRing::from_specs(
            CurveSpec::circle([0.0, 0.0], 2.0),
            CurveSpec::circle([0.0, 0.0], 1.0),
            SpaceFormChart::new(0.0, 2).unwrap(),
        )
        .unwrap();
        Arc::new(build_grid(ring, n, 2 * n).unwrap())
    }

    fn harmonic(p: [f64; 2]) -> f64 {
        (2.0 / (p[0] * p[0] + p[1] * p[1]).sqrt()).ln() / 2f64.ln()
    }

    #[test]
    fn harmonic_half_level_is_circle_of_radius_sqrt2() {
        let f = ScalarField::from_fn(circles(32), 0.0, 1.0, harmonic).unwrap();
        let rep = extract_level(&f, 0.5).unwrap();
        assert_eq!(rep.components, 1);
        assert_eq!(rep.polyline.first(), rep.polyline.last());
        for p in &rep.polyline {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 2f64.sqrt()).abs() < 2e-3, "{r}");
        }
        for &k in &rep.curvature {
            assert!((k - 1.0 / 2f64.sqrt()).abs() < 5e-3, "{k}");
        }
    }

    #[test]
    fn level_near_outer_boundary_has_boundary_curvature() {
        let n = 64;
        let g = circles(n);
        let f = ScalarField::from_fn(g.clone(), 0.0, 1.0, harmonic).unwrap();
        // Level through the radius two grid spacings inside ∂Ω₀.
        let c = harmonic([2.0 - 2.0 / n as f64, 0.0]);
        let rep = extract_level(&f, c).unwrap();
        assert!(((rep.min_curvature - 0.5) / 0.5).abs() < 0.05);
    }

    #[test]
    fn polyline_is_ordered_by_theta() {
        let f = ScalarField::from_fn(circles(16), 0.0, 1.0, harmonic).unwrap();
        let rep = extract_level(&f, 0.3).unwrap();
        let th: Vec<f64> = rep.polyline[..rep.polyline.len() - 1].iter().map(|p| p[1].atan2(p[0]).rem_euclid(TAU)).collect();
        assert!(th.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn out_of_range_levels() {
        let f = ScalarField::from_fn(circles(16), 0.0, 1.0, harmonic).unwrap();
        for c in [0.0, 1.0, -0.1, 1.5] {
            assert!(matches!(extract_level(&f, c), Err(Error::LevelOutOfRange { .. })));
        }
    }

    #[test]
    fn saddle_field_shows_negative_curvature() {
        let g = circles(32);
        let f = ScalarField::from_fn(g.clone(), 0.0, 1.0, |p| {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let s = 2.0 - r;
            harmonic(p) + 0.1 * (std::f64::consts::PI * s).sin() * (5.0 * p[1].atan2(p[0])).cos()
        })
        .unwrap();
        let rep = extract_level(&f, 0.5).unwrap();
        assert!(rep.min_curvature < 0.0);
    }
}
