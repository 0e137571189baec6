//! Convex rings `Ω₀ \ Ω̄₁` and the structured transfinite grid between the
//! two boundary curves.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaceform::{ChartSpec, SpaceFormChart};

/// Number of samples used for convexity, containment and chart checks.
pub const CURVE_SAMPLES: usize = 1440;

/// Parametric description of a closed curve, `θ ∈ [0, 2π)`, counter-clockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSpec {
    Circle {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        #[serde(default)]
        center: [f64; 2],
        a: f64,
        b: f64,
        /// Rotation of the `a` axis, radians.
        #[serde(default)]
        rotation: f64,
    },
    /// Star-shaped polar curve `r(θ) = r0 + Σ_k (cos[k]·cos((k+1)θ) + sin[k]·sin((k+1)θ))`.
    Fourier {
        #[serde(default)]
        center: [f64; 2],
        r0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

impl CurveSpec {
    pub fn circle(center: [f64; 2], radius: f64) -> Self {
        CurveSpec::Circle { center, radius }
    }

    pub fn ellipse(center: [f64; 2], a: f64, b: f64) -> Self {
        CurveSpec::Ellipse { center, a, b, rotation: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            CurveSpec::Circle { center, radius } => {
                if !finite(center) || !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidCurve(format!("circle needs radius > 0, got {radius}")));
                }
            }
            CurveSpec::Ellipse { center, a, b, rotation } => {
                if !finite(center) || !rotation.is_finite() || !(*a > 0.0 && *b > 0.0) || !finite(&[*a, *b]) {
                    return Err(Error::InvalidCurve(format!("ellipse needs radii a, b > 0, got a = {a}, b = {b}")));
                }
            }
            CurveSpec::Fourier { center, r0, cos, sin } => {
                if !finite(center) || !finite(cos) || !finite(sin) || !(*r0 > 0.0) || !r0.is_finite() {
                    return Err(Error::InvalidCurve(format!("fourier curve needs r0 > 0, got {r0}")));
                }
            }
        }
        Ok(())
    }

    /// Point and first two parametric derivatives at `θ`.
    pub fn eval(&self, theta: f64) -> CurvePoint {
        let (s, c) = theta.sin_cos();
        match self {
            CurveSpec::Circle { center, radius } => CurvePoint {
                p: [center[0] + radius * c, center[1] + radius * s],
                d1: [-radius * s, radius * c],
                d2: [-radius * c, -radius * s],
            },
            CurveSpec::Ellipse { center, a, b, rotation } => {
                let (rs, rc) = rotation.sin_cos();
                let rot = |v: [f64; 2]| [rc * v[0] - rs * v[1], rs * v[0] + rc * v[1]];
                let p = rot([a * c, b * s]);
                CurvePoint {
                    p: [center[0] + p[0], center[1] + p[1]],
                    d1: rot([-a * s, b * c]),
                    d2: rot([-a * c, -b * s]),
                }
            }
            CurveSpec::Fourier { center, r0, cos, sin } => {
                let (mut r, mut r1, mut r2) = (*r0, 0.0, 0.0);
                let modes = cos.len().max(sin.len());
                for m in 0..modes {
                    let k = (m + 1) as f64;
                    let a = cos.get(m).copied().unwrap_or(0.0);
                    let b = sin.get(m).copied().unwrap_or(0.0);
                    let (sk, ck) = (k * theta).sin_cos();
                    r += a * ck + b * sk;
                    r1 += k * (-a * sk + b * ck);
                    r2 += -k * k * (a * ck + b * sk);
                }
                CurvePoint {
                    p: [center[0] + r * c, center[1] + r * s],
                    d1: [r1 * c - r * s, r1 * s + r * c],
                    d2: [(r2 - r) * c - 2.0 * r1 * s, (r2 - r) * s + 2.0 * r1 * c],
                }
            }
        }
    }

    fn min_polar_radius(&self) -> f64 {
        match self {
            CurveSpec::Fourier { r0, cos, sin, .. } => {
                let spec = CurveSpec::Fourier { center: [0.0, 0.0], r0: *r0, cos: cos.clone(), sin: sin.clone() };
                (0..CURVE_SAMPLES)
                    .map(|k| {
                        let p = spec.eval(sample_theta(k, CURVE_SAMPLES)).p;
                        (p[0] * p[0] + p[1] * p[1]).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            _ => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub p: [f64; 2],
    pub d1: [f64; 2],
    pub d2: [f64; 2],
}

impl CurvePoint {
    /// Signed curvature in the chart, positive for counter-clockwise convex arcs.
    pub fn curvature(&self) -> f64 {
        let speed = (self.d1[0] * self.d1[0] + self.d1[1] * self.d1[1]).sqrt();
        cross(self.d1, self.d2) / speed.powi(3)
    }

    /// Unit normal pointing away from the enclosed region.
    pub fn outward_normal(&self) -> [f64; 2] {
        let speed = (self.d1[0] * self.d1[0] + self.d1[1] * self.d1[1]).sqrt();
        [self.d1[1] / speed, -self.d1[0] / speed]
    }

    /// Geodesic curvature for the metric `λ²|dx|²`:
    /// `κ_g = κ/λ + ∂_ν log λ / λ = κ/λ − (ε/2) x·ν` with `ν` the outward normal.
    pub fn geodesic_curvature(&self, chart: &SpaceFormChart) -> f64 {
        let lam = chart.lambda_unchecked(&self.p);
        let nu = self.outward_normal();
        self.curvature() / lam - 0.5 * chart.epsilon() * (self.p[0] * nu[0] + self.p[1] * nu[1])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexCurve {
    spec: CurveSpec,
    min_curvature: f64,
    max_curvature: f64,
}

/// Builds a curve and verifies strict convexity on [`CURVE_SAMPLES`] samples.
pub fn make_curve(spec: CurveSpec) -> Result<ConvexCurve> {
    spec.validate()?;
    if spec.min_polar_radius() <= 0.0 {
        return Err(Error::InvalidCurve("fourier radius must stay positive".into()));
    }
    let mut min_k = f64::INFINITY;
    let mut max_k = f64::NEG_INFINITY;
    let mut worst_theta = 0.0;
    for k in 0..CURVE_SAMPLES {
        let theta = sample_theta(k, CURVE_SAMPLES);
        let kappa = spec.eval(theta).curvature();
        if kappa < min_k {
            min_k = kappa;
            worst_theta = theta;
        }
        max_k = max_k.max(kappa);
    }
    if !(min_k > 0.0) {
        return Err(Error::ConvexityViolation { theta: worst_theta, curvature: min_k });
    }
    Ok(ConvexCurve { spec, min_curvature: min_k, max_curvature: max_k })
}

impl ConvexCurve {
    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn eval(&self, theta: f64) -> CurvePoint {
        self.spec.eval(theta)
    }

    pub fn point(&self, theta: f64) -> [f64; 2] {
        self.spec.eval(theta).p
    }

    pub fn curvature(&self, theta: f64) -> f64 {
        self.spec.eval(theta).curvature()
    }

    pub fn min_curvature(&self) -> f64 {
        self.min_curvature
    }

    pub fn max_curvature(&self) -> f64 {
        self.max_curvature
    }

    pub fn samples(&self, count: usize) -> Vec<[f64; 2]> {
        (0..count).map(|k| self.point(sample_theta(k, count))).collect()
    }

    fn geodesic_range(&self, chart: &SpaceFormChart) -> (f64, f64) {
        let mut worst = (f64::INFINITY, 0.0);
        for k in 0..CURVE_SAMPLES {
            let theta = sample_theta(k, CURVE_SAMPLES);
            let kg = self.eval(theta).geodesic_curvature(chart);
            if kg < worst.0 {
                worst = (kg, theta);
            }
        }
        worst
    }
}

/// `Ω = Ω₀ \ Ω̄₁` in a space-form chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexRing {
    outer: ConvexCurve,
    inner: ConvexCurve,
    chart: SpaceFormChart,
}

impl ConvexRing {
    pub fn new(outer: ConvexCurve, inner: ConvexCurve, chart: SpaceFormChart) -> Result<Self> {
        for (name, curve) in [("outer", &outer), ("inner", &inner)] {
            for p in curve.samples(CURVE_SAMPLES) {
                if !chart.contains(&p) {
                    return Err(Error::ChartDomain { point: p.to_vec(), radius: chart.chart_radius() });
                }
            }
            if chart.epsilon() != 0.0 {
                let (kg, theta) = curve.geodesic_range(&chart);
                if !(kg > 0.0) {
                    log::warn!("{name} curve fails the geodesic convexity check");
                    return Err(Error::ConvexityViolation { theta, curvature: kg });
                }
            }
        }
        check_containment(&outer, &inner)?;
        Ok(Self { outer, inner, chart })
    }

    pub fn from_specs(outer: CurveSpec, inner: CurveSpec, chart: SpaceFormChart) -> Result<Self> {
        Self::new(make_curve(outer)?, make_curve(inner)?, chart)
    }

    pub fn outer(&self) -> &ConvexCurve {
        &self.outer
    }

    pub fn inner(&self) -> &ConvexCurve {
        &self.inner
    }

    pub fn chart(&self) -> &SpaceFormChart {
        &self.chart
    }

    /// Concentric circles about the origin, if that is what this ring is.
    pub fn concentric_radii(&self) -> Option<(f64, f64)> {
        match (self.inner.spec(), self.outer.spec()) {
            (CurveSpec::Circle { center: ci, radius: ri }, CurveSpec::Circle { center: co, radius: ro })
                if *ci == [0.0, 0.0] && *co == [0.0, 0.0] =>
            {
                Some((*ri, *ro))
            }
            _ => None,
        }
    }
}

fn check_containment(outer: &ConvexCurve, inner: &ConvexCurve) -> Result<()> {
    let poly = outer.samples(CURVE_SAMPLES);
    let n = poly.len();
    let scale = poly.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max).max(1.0);
    for k in 0..CURVE_SAMPLES {
        let theta = sample_theta(k, CURVE_SAMPLES);
        let q = inner.point(theta);
        let mut dist = f64::INFINITY;
        for e in 0..n {
            let a = poly[e];
            let b = poly[(e + 1) % n];
            let edge = [b[0] - a[0], b[1] - a[1]];
            let rel = [q[0] - a[0], q[1] - a[1]];
            if cross(edge, rel) <= 0.0 {
                return Err(Error::Containment(format!(
                    "inner point at theta = {theta:.6} ({:.6}, {:.6}) is not inside the outer curve",
                    q[0], q[1]
                )));
            }
            dist = dist.min(segment_distance(q, a, b));
        }
        if dist <= 1e-9 * scale {
            return Err(Error::Containment(format!("inner curve touches the outer curve at theta = {theta:.6}")));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureRange {
    pub min: f64,
    pub max: f64,
    /// Minimum geodesic curvature in the space-form metric.
    pub min_geodesic: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConvexityReport {
    pub outer: CurvatureRange,
    pub inner: CurvatureRange,
}

pub fn boundary_convexity_report(ring: &ConvexRing) -> BoundaryConvexityReport {
    let range = |c: &ConvexCurve| CurvatureRange {
        min: c.min_curvature(),
        max: c.max_curvature(),
        min_geodesic: c.geodesic_range(ring.chart()).0,
    };
    BoundaryConvexityReport { outer: range(ring.outer()), inner: range(ring.inner()) }
}

/// 2×2 matrix `[[x_s, x_θ], [y_s, y_θ]]`.
pub type Mat2 = [[f64; 2]; 2];

/// Position and derivatives of the blend map `x(s, θ)`.
#[derive(Clone, Copy, Debug)]
pub struct MapDerivatives {
    pub x: [f64; 2],
    pub xs: [f64; 2],
    pub xt: [f64; 2],
    pub xst: [f64; 2],
    pub xtt: [f64; 2],
}

impl MapDerivatives {
    pub fn jacobian(&self) -> Mat2 {
        [[self.xs[0], self.xt[0]], [self.xs[1], self.xt[1]]]
    }

    pub fn det(&self) -> f64 {
        cross(self.xs, self.xt)
    }
}

/// Everything needed to rebuild an [`AnnularGrid`] bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub chart: ChartSpec,
    pub outer: CurveSpec,
    pub inner: CurveSpec,
    /// Radial intervals; the grid has `ns + 1` node rows.
    pub ns: usize,
    /// Angular nodes (periodic).
    pub ntheta: usize,
}

impl GridSpec {
    pub fn build(&self, allow_negative_curvature: bool) -> Result<AnnularGrid> {
        let chart = SpaceFormChart::from_spec(&self.chart, allow_negative_curvature)?;
        let ring = ConvexRing::from_specs(self.outer.clone(), self.inner.clone(), chart)?;
        build_grid(ring, self.ns, self.ntheta)
    }
}

/// Structured grid `x(s, θ) = (1−s)·γ_outer(θ) + s·γ_inner(θ)`. Row `i` sits
/// at `s = i/ns`; row 0 is the outer boundary, row `ns` the inner one.
#[derive(Clone, Debug)]
pub struct AnnularGrid {
    ring: ConvexRing,
    ns: usize,
    ntheta: usize,
    nodes: Vec<[f64; 2]>,
    jacobians: Vec<Mat2>,
    orientation: f64,
    h_max: f64,
}

pub const MIN_RADIAL_INTERVALS: usize = 8;
pub const MIN_ANGULAR_NODES: usize = 16;

pub fn build_grid(ring: ConvexRing, ns: usize, ntheta: usize) -> Result<AnnularGrid> {
    if ns < MIN_RADIAL_INTERVALS || ntheta < MIN_ANGULAR_NODES {
        return Err(Error::InvalidGrid(format!(
            "need ns >= {MIN_RADIAL_INTERVALS} and ntheta >= {MIN_ANGULAR_NODES}, got {ns} x {ntheta}"
        )));
    }
    let mut grid = AnnularGrid {
        ring,
        ns,
        ntheta,
        nodes: Vec::with_capacity((ns + 1) * ntheta),
        jacobians: Vec::with_capacity((ns + 1) * ntheta),
        orientation: 0.0,
        h_max: 0.0,
    };
    for i in 0..=ns {
        for j in 0..ntheta {
            let d = grid.map_derivatives(grid.s(i), grid.theta(j));
            grid.nodes.push(d.x);
            grid.jacobians.push(d.jacobian());
        }
    }
    let first = grid.map_derivatives(0.0, 0.0).det();
    grid.orientation = first.signum();
    let scale = grid.nodes.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max).max(1e-300);
    let tiny = 1e-12 * scale * scale;
    // Nodes and the half-way points used by the flux stencil.
    for i2 in 0..=(2 * ns) {
        for j2 in 0..(2 * ntheta) {
            let s = i2 as f64 / (2 * ns) as f64;
            let theta = j2 as f64 / (2 * ntheta) as f64 * TAU;
            let det = grid.map_derivatives(s, theta).det();
            if !(det * grid.orientation > tiny) {
                return Err(Error::GridDegeneracy { i: i2 / 2, j: j2 / 2, det });
            }
        }
    }
    let mut h: f64 = 0.0;
    for i in 0..=ns {
        for j in 0..ntheta {
            let p = grid.node(i, j);
            let q = grid.node(i, (j + 1) % ntheta);
            h = h.max(dist(p, q));
            if i < ns {
                h = h.max(dist(p, grid.node(i + 1, j)));
            }
        }
    }
    grid.h_max = h;
    Ok(grid)
}

impl AnnularGrid {
    pub fn ring(&self) -> &ConvexRing {
        &self.ring
    }

    pub fn chart(&self) -> &SpaceFormChart {
        self.ring.chart()
    }

    /// Radial intervals.
    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn rows(&self) -> usize {
        self.ns + 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ds(&self) -> f64 {
        1.0 / self.ns as f64
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.ntheta as f64
    }

    #[inline]
    pub fn s(&self, i: usize) -> f64 {
        i as f64 / self.ns as f64
    }

    #[inline]
    pub fn theta(&self, j: usize) -> f64 {
        sample_theta(j, self.ntheta)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ntheta + j
    }

    #[inline]
    pub fn wrap(&self, j: isize) -> usize {
        j.rem_euclid(self.ntheta as isize) as usize
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        self.nodes[self.index(i, j)]
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn jacobian(&self, i: usize, j: usize) -> Mat2 {
        self.jacobians[self.index(i, j)]
    }

    /// Sign of `det ∂x/∂(s, θ)`, constant over the grid.
    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Largest edge length in chart coordinates.
    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn map(&self, s: f64, theta: f64) -> [f64; 2] {
        let o = self.ring.outer().point(theta);
        let n = self.ring.inner().point(theta);
        [(1.0 - s) * o[0] + s * n[0], (1.0 - s) * o[1] + s * n[1]]
    }

    pub fn map_derivatives(&self, s: f64, theta: f64) -> MapDerivatives {
        let o = self.ring.outer().eval(theta);
        let n = self.ring.inner().eval(theta);
        let blend = |a: [f64; 2], b: [f64; 2]| [(1.0 - s) * a[0] + s * b[0], (1.0 - s) * a[1] + s * b[1]];
        MapDerivatives {
            x: blend(o.p, n.p),
            xs: [n.p[0] - o.p[0], n.p[1] - o.p[1]],
            xt: blend(o.d1, n.d1),
            xst: [n.d1[0] - o.d1[0], n.d1[1] - o.d1[1]],
            xtt: blend(o.d2, n.d2),
        }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            chart: self.chart().spec(),
            outer: self.ring.outer().spec().clone(),
            inner: self.ring.inner().spec().clone(),
            ns: self.ns,
            ntheta: self.ntheta,
        }
    }

    /// Grid with twice the intervals in both directions; every node of `self`
    /// is a node of the result.
    pub fn refine(&self) -> Result<AnnularGrid> {
        build_grid(self.ring.clone(), 2 * self.ns, 2 * self.ntheta)
    }

    pub fn same_layout(&self, other: &AnnularGrid) -> bool {
        self.ns == other.ns && self.ntheta == other.ntheta && self.spec() == other.spec()
    }
}

#[inline]
pub(crate) fn sample_theta(k: usize, count: usize) -> f64 {
    k as f64 / count as f64 * TAU
}

#[inline]
fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn segment_distance(q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let aq = [q[0] - a[0], q[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { ((aq[0] * ab[0] + aq[1] * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    dist(q, [a[0] + t * ab[0], a[1] + t * ab[1]])
}
