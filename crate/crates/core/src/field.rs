//! Grid functions on an [`AnnularGrid`] and their finite-difference jets.

use std::f64::consts::TAU;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_json;
use crate::ring::{AnnularGrid, GridSpec};
use crate::spaceform::{CoordinateJet, PointJet};

pub const SNAPSHOT_FORMAT: &str = "ringlab-field";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Nodal values on a grid. Row 0 holds the outer boundary value and row
/// `ns` the inner one, exactly.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<AnnularGrid>,
    values: Vec<f64>,
    outer_value: f64,
    inner_value: f64,
}

impl ScalarField {
    pub fn new(grid: Arc<AnnularGrid>, values: Vec<f64>, outer_value: f64, inner_value: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at node {k}")));
        }
        let field = Self { grid, values, outer_value, inner_value };
        let (ns, nt) = (field.grid.ns(), field.grid.ntheta());
        for j in 0..nt {
            if field.get(0, j) != outer_value || field.get(ns, j) != inner_value {
                return Err(Error::InvalidArgument(format!("boundary row mismatch at theta index {j}")));
            }
        }
        Ok(field)
    }

    /// Samples `f` at interior nodes; boundary rows get the given constants.
    pub fn from_fn<F>(grid: Arc<AnnularGrid>, outer_value: f64, inner_value: f64, f: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> f64,
    {
        let ns = grid.ns();
        let nt = grid.ntheta();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..=ns {
            for j in 0..nt {
                values.push(match i {
                    0 => outer_value,
                    i if i == ns => inner_value,
                    _ => f(grid.node(i, j)),
                });
            }
        }
        Self::new(grid, values, outer_value, inner_value)
    }

    /// Boundary rows set, interior from `interior` ordered row by row.
    pub fn from_interior(grid: Arc<AnnularGrid>, outer_value: f64, inner_value: f64, interior: &[f64]) -> Result<Self> {
        let nt = grid.ntheta();
        let expected = (grid.ns() - 1) * nt;
        if interior.len() != expected {
            return Err(Error::GridMismatch(format!("{} interior values, expected {expected}", interior.len())));
        }
        let mut values = Vec::with_capacity(grid.len());
        values.extend(std::iter::repeat(outer_value).take(nt));
        values.extend_from_slice(interior);
        values.extend(std::iter::repeat(inner_value).take(nt));
        Self::new(grid, values, outer_value, inner_value)
    }

    pub fn grid(&self) -> &AnnularGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<AnnularGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interior_values(&self) -> &[f64] {
        let nt = self.grid.ntheta();
        &self.values[nt..self.values.len() - nt]
    }

    /// `(outer, inner)` Dirichlet values.
    pub fn boundary_values(&self) -> (f64, f64) {
        (self.outer_value, self.inner_value)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Applies `f` to every node value, boundary constants included.
    pub fn map_values<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::new(self.grid.clone(), values, f(self.outer_value), f(self.inner_value))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.map_values(|v| v * factor)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self − other` on a common grid.
    pub fn difference(&self, other: &ScalarField) -> Result<Self> {
        self.require_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        // Boundary rows stay exact: each is a difference of two constants.
        Ok(Self {
            grid: self.grid.clone(),
            values,
            outer_value: self.outer_value - other.outer_value,
            inner_value: self.inner_value - other.inner_value,
        })
    }

    fn require_same_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_layout(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{} grid vs {}x{} grid",
                self.grid.ns(),
                self.grid.ntheta(),
                other.grid.ns(),
                other.grid.ntheta()
            )))
        }
    }

    /// Derivatives with respect to `(s, θ)`: `(u_s, u_θ, u_ss, u_sθ, u_θθ)`.
    /// Centered in the interior and in θ; second-order one-sided at the
    /// boundary rows.
    fn computational_derivatives(&self, i: usize, j: usize) -> [f64; 5] {
        let g = &*self.grid;
        let ns = g.ns();
        let ds = g.ds();
        let dt = g.dtheta();
        let jp = g.wrap(j as isize + 1);
        let jm = g.wrap(j as isize - 1);
        let u = |i: usize, j: usize| self.get(i, j);
        let u_t = |i: usize| (u(i, jp) - u(i, jm)) / (2.0 * dt);
        let ut = u_t(i);
        let utt = (u(i, jp) - 2.0 * u(i, j) + u(i, jm)) / (dt * dt);
        let (us, uss, ust) = if i == 0 {
            (
                (-3.0 * u(0, j) + 4.0 * u(1, j) - u(2, j)) / (2.0 * ds),
                (2.0 * u(0, j) - 5.0 * u(1, j) + 4.0 * u(2, j) - u(3, j)) / (ds * ds),
                (-3.0 * u_t(0) + 4.0 * u_t(1) - u_t(2)) / (2.0 * ds),
            )
        } else if i == ns {
            (
                (3.0 * u(ns, j) - 4.0 * u(ns - 1, j) + u(ns - 2, j)) / (2.0 * ds),
                (2.0 * u(ns, j) - 5.0 * u(ns - 1, j) + 4.0 * u(ns - 2, j) - u(ns - 3, j)) / (ds * ds),
                (3.0 * u_t(ns) - 4.0 * u_t(ns - 1) + u_t(ns - 2)) / (2.0 * ds),
            )
        } else {
            (
                (u(i + 1, j) - u(i - 1, j)) / (2.0 * ds),
                (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) / (ds * ds),
                (u_t(i + 1) - u_t(i - 1)) / (2.0 * ds),
            )
        };
        [us, ut, uss, ust, utt]
    }

    /// Chart-coordinate gradient and Hessian at node `(i, j)` by the chain
    /// rule through the blend map.
    pub fn coordinate_jet(&self, i: usize, j: usize) -> CoordinateJet {
        let g = &*self.grid;
        let [us, ut, uss, ust, utt] = self.computational_derivatives(i, j);
        let d = g.map_derivatives(g.s(i), g.theta(j));
        // Jm = [[x_s, x_θ], [y_s, y_θ]]; Du = Jm^{-T} (u_s, u_θ).
        let (a, b, c, e) = (d.xs[0], d.xt[0], d.xs[1], d.xt[1]);
        let det = a * e - b * c;
        let inv = [[e / det, -b / det], [-c / det, a / det]];
        let grad = [inv[0][0] * us + inv[1][0] * ut, inv[0][1] * us + inv[1][1] * ut];
        // Remove the map curvature: D²_ξ u − Σ_α u_α X^α_ξξ (X_ss = 0).
        let m = [
            [uss, ust - grad[0] * d.xst[0] - grad[1] * d.xst[1]],
            [ust - grad[0] * d.xst[0] - grad[1] * d.xst[1], utt - grad[0] * d.xtt[0] - grad[1] * d.xtt[1]],
        ];
        // H = Jm^{-T} m Jm^{-1}.
        let mut h = [[0.0; 2]; 2];
        for (p, row) in h.iter_mut().enumerate() {
            for (q, hpq) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        acc += inv[k][p] * m[k][l] * inv[l][q];
                    }
                }
                *hpq = acc;
            }
        }
        let sym = 0.5 * (h[0][1] + h[1][0]);
        CoordinateJet {
            value: self.get(i, j),
            grad: DVector::from_column_slice(&grad),
            hess: DMatrix::from_row_slice(2, 2, &[h[0][0], sym, sym, h[1][1]]),
        }
    }

    /// Covariant jet at a node. Boundary-row jets use one-sided stencils and
    /// carry the `one_sided` flag.
    pub fn fd_jet(&self, i: usize, j: usize) -> Result<PointJet> {
        let g = &*self.grid;
        if i > g.ns() || j >= g.ntheta() {
            return Err(Error::InvalidArgument(format!("node ({i}, {j}) is outside the grid")));
        }
        let cj = self.coordinate_jet(i, j);
        let one_sided = i == 0 || i == g.ns();
        g.chart().covariant_jet_from(&g.node(i, j), &cj, one_sided)
    }

    /// Jets for all interior rows, row by row.
    pub fn interior_jets(&self) -> Result<Vec<PointJet>> {
        let g = &*self.grid;
        let nt = g.ntheta();
        (nt..(g.ns()) * nt).into_par_iter().map(|k| self.fd_jet(k / nt, k % nt)).collect()
    }

    /// Jets for the two boundary rows: `(outer, inner)`.
    pub fn boundary_jets(&self) -> Result<(Vec<PointJet>, Vec<PointJet>)> {
        let g = &*self.grid;
        let outer = (0..g.ntheta()).map(|j| self.fd_jet(0, j)).collect::<Result<Vec<_>>>()?;
        let inner = (0..g.ntheta()).map(|j| self.fd_jet(g.ns(), j)).collect::<Result<Vec<_>>>()?;
        Ok((outer, inner))
    }

    /// Computational coordinates `(s, θ)` of a chart point, by Newton on the
    /// blend map started from the nearest node.
    pub fn locate(&self, point: [f64; 2]) -> Result<(f64, f64)> {
        let g = &*self.grid;
        let (k, d2) = g
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, p)| (k, (p[0] - point[0]).powi(2) + (p[1] - point[1]).powi(2)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        let (i0, j0) = (k / g.ntheta(), k % g.ntheta());
        if d2 == 0.0 {
            return Ok((g.s(i0), g.theta(j0)));
        }
        let mut s = g.s(i0);
        let mut t = g.theta(j0);
        let mut last_step = f64::INFINITY;
        for _ in 0..20 {
            let d = g.map_derivatives(s, t);
            let f = [d.x[0] - point[0], d.x[1] - point[1]];
            let det = d.det();
            let step_s = (d.xt[1] * f[0] - d.xt[0] * f[1]) / det;
            let step_t = (-d.xs[1] * f[0] + d.xs[0] * f[1]) / det;
            s -= step_s;
            t -= step_t;
            last_step = step_s.abs().max(step_t.abs());
            if last_step <= 1e-12 {
                break;
            }
        }
        if !(last_step <= 1e-12) {
            return Err(Error::Inversion { point: point.to_vec(), last_step });
        }
        if !(-1e-10..=1.0 + 1e-10).contains(&s) {
            return Err(Error::OutsideRing { point: point.to_vec() });
        }
        Ok((s.clamp(0.0, 1.0), t.rem_euclid(TAU)))
    }

    /// Bilinear interpolation in `(s, θ)` at a chart point inside the ring.
    pub fn interpolate(&self, point: [f64; 2]) -> Result<f64> {
        let (s, t) = self.locate(point)?;
        Ok(self.interpolate_computational(s, t))
    }

    pub fn interpolate_computational(&self, s: f64, theta: f64) -> f64 {
        let g = &*self.grid;
        let x = s * g.ns() as f64;
        let i0 = (x.floor() as usize).min(g.ns() - 1);
        let a = x - i0 as f64;
        let y = theta.rem_euclid(TAU) / g.dtheta();
        let j0 = (y.floor() as usize).min(g.ntheta() - 1);
        let b = y - j0 as f64;
        let j1 = (j0 + 1) % g.ntheta();
        (1.0 - a) * (1.0 - b) * self.get(i0, j0)
            + a * (1.0 - b) * self.get(i0 + 1, j0)
            + (1.0 - a) * b * self.get(i0, j1)
            + a * b * self.get(i0 + 1, j1)
    }

    pub fn to_snapshot(&self) -> FieldSnapshot {
        FieldSnapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            grid: self.grid.spec(),
            boundary_values: [self.outer_value, self.inner_value],
            values: self.values.clone(),
        }
    }

    pub fn from_snapshot(snapshot: &FieldSnapshot, allow_negative_curvature: bool) -> Result<Self> {
        if snapshot.format != SNAPSHOT_FORMAT || snapshot.version != SNAPSHOT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported snapshot format {} v{}",
                snapshot.format, snapshot.version
            )));
        }
        let grid = Arc::new(snapshot.grid.build(allow_negative_curvature)?);
        Self::new(grid, snapshot.values.clone(), snapshot.boundary_values[0], snapshot.boundary_values[1])
    }

    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        write_json(path, &self.to_snapshot())
    }

    pub fn read_snapshot(path: &Path, allow_negative_curvature: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let snap: FieldSnapshot = serde_json::from_str(&text)?;
        Self::from_snapshot(&snap, allow_negative_curvature)
    }
}

/// Self-describing JSON form of a field; values are row-major with rows at
/// constant `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub format: String,
    pub version: u32,
    pub grid: GridSpec,
    /// `[outer, inner]`.
    pub boundary_values: [f64; 2],
    pub values: Vec<f64>,
}

/// Entrywise sup norms of value, gradient and Hessian over interior nodes,
/// summed.
pub fn c2_norm(field: &ScalarField) -> Result<f64> {
    let jets = field.interior_jets()?;
    let mut sup = [0.0f64; 3];
    for jet in &jets {
        sup[0] = sup[0].max(jet.value.abs());
        sup[1] = sup[1].max(jet.grad.amax());
        sup[2] = sup[2].max(jet.hess.amax());
    }
    Ok(sup.iter().sum())
}

/// Discrete C² distance between two fields on the same grid.
pub fn discrete_c2_distance(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    c2_norm(&f.difference(g)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{build_grid, ConvexRing, CurveSpec};
    use crate::spaceform::SpaceFormChart;
    use approx::assert_abs_diff_eq;

    fn circle_grid(ns: usize, nt: usize) -> Arc<AnnularGrid> {
        let ring = ConvexRing::from_specs(
            CurveSpec::circle([0.0, 0.0], 2.0),
            CurveSpec::circle([0.0, 0.0], 1.0),
            SpaceFormChart::new(0.0, 2).unwrap(),
        )
        .unwrap();
        Arc::new(build_grid(ring, ns, nt).unwrap())
    }

    fn ellipse_grid(ns: usize, nt: usize) -> Arc<AnnularGrid> {
        let ring = ConvexRing::from_specs(
            CurveSpec::ellipse([0.0, 0.0], 3.0, 2.0),
            CurveSpec::Ellipse { center: [0.2, 0.1], a: 1.2, b: 0.8, rotation: 0.2 },
            SpaceFormChart::new(0.0, 2).unwrap(),
        )
        .unwrap();
        Arc::new(build_grid(ring, ns, nt).unwrap())
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let grid = ellipse_grid(16, 32);
        let f = ScalarField::from_fn(grid, 0.7, 0.7, |_| 0.7).unwrap();
        for (i, j) in [(0, 3), (5, 7), (16, 31)] {
            let jet = f.fd_jet(i, j).unwrap();
            assert!(jet.grad.amax() < 1e-12);
            assert!(jet.hess.amax() < 1e-9);
        }
    }

    #[test]
    fn boundary_rows_must_match() {
        let grid = circle_grid(8, 16);
        let mut values = vec![0.0; grid.len()];
        values[0] = 1.0;
        assert!(ScalarField::new(grid.clone(), values, 0.0, 0.0).is_err());
        let values = vec![f64::NAN; grid.len()];
        assert!(ScalarField::new(grid, values, 0.0, 0.0).is_err());
    }

    /// Values depending on position only through the boundary rows are
    /// irrelevant for interior jets of linear and quadratic functions; use a
    /// raw field without Dirichlet structure.
    fn raw(grid: &Arc<AnnularGrid>, f: impl Fn([f64; 2]) -> f64) -> ScalarField {
        let values = grid.nodes().iter().map(|&p| f(p)).collect::<Vec<_>>();
        ScalarField { grid: grid.clone(), values, outer_value: f64::NAN, inner_value: f64::NAN }
    }

    #[test]
    fn linear_field_gradient() {
        let grid = circle_grid(32, 64);
        let f = raw(&grid, |p| p[0]);
        let jet = f.fd_jet(16, 0).unwrap();
        assert_abs_diff_eq!(jet.grad[0], 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(jet.grad[1], 0.0, epsilon = 1e-12);
    }

    fn quadratic_hessian_error(n: usize) -> f64 {
        let grid = ellipse_grid(n, 2 * n);
        let f = raw(&grid, |p| p[0] * p[0] + p[1] * p[1]);
        let mut err: f64 = 0.0;
        for i in 0..=n {
            for j in 0..2 * n {
                let jet = f.fd_jet(i, j).unwrap();
                err = err.max((&jet.hess - DMatrix::identity(2, 2) * 2.0).amax());
            }
        }
        err
    }

    #[test]
    fn quadratic_hessian_converges_at_second_order() {
        let errs: Vec<f64> = [16, 32, 64].iter().map(|&n| quadratic_hessian_error(n)).collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "errors {errs:?}");
        }
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let grid = ellipse_grid(16, 32);
        let f = ScalarField::from_fn(grid.clone(), 0.0, 1.0, |p| (p[0] * 0.3).sin() + p[1] * p[1]).unwrap();
        for (i, j) in [(0, 0), (3, 5), (16, 31), (9, 17)] {
            assert_eq!(f.interpolate(grid.node(i, j)).unwrap(), f.get(i, j));
        }
    }

    #[test]
    fn interpolation_exact_for_bilinear_in_computational_space() {
        let grid = ellipse_grid(16, 32);
        let values: Vec<f64> = (0..=16)
            .flat_map(|i| (0..32).map(move |j| (i as f64) * 0.1 + (j as f64) * 0.03 + (i * j) as f64 * 0.001))
            .collect();
        let f = ScalarField { grid: grid.clone(), values, outer_value: 0.0, inner_value: 0.0 };
        let (s, t) = ((3.5) / 16.0, (5.5) * grid.dtheta());
        let p = grid.map(s, t);
        let expected = 3.5 * 0.1 + 5.5 * 0.03 + 3.5 * 5.5 * 0.001;
        assert_abs_diff_eq!(f.interpolate(p).unwrap(), expected, epsilon = 1e-10);
    }

    #[test]
    fn interpolation_of_radial_field_converges() {
        let exact = |p: [f64; 2]| (2.0 / (p[0] * p[0] + p[1] * p[1]).sqrt()).ln() / 2f64.ln();
        let point = [1.23, 0.41];
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let grid = circle_grid(n, 2 * n);
                let f = ScalarField::from_fn(grid, 0.0, 1.0, exact).unwrap();
                (f.interpolate(point).unwrap() - exact(point)).abs()
            })
            .collect();
        assert!(errs[2] < errs[0] / 10.0, "errors {errs:?}");
    }

    #[test]
    fn points_outside_are_rejected() {
        let grid = circle_grid(16, 32);
        let f = ScalarField::from_fn(grid, 0.0, 1.0, |_| 0.5).unwrap();
        assert!(matches!(f.interpolate([2.5, 0.0]), Err(Error::OutsideRing { .. })));
        assert!(matches!(f.interpolate([0.5, 0.0]), Err(Error::OutsideRing { .. })));
    }

    #[test]
    fn c2_distance_of_linear_perturbation() {
        let grid = circle_grid(32, 64);
        let f = ScalarField::from_fn(grid.clone(), 0.0, 1.0, |p| 0.1 * p[1]).unwrap();
        assert_eq!(discrete_c2_distance(&f, &f).unwrap(), 0.0);
        let a = raw(&grid, |p| (p[0] * p[1]).sin());
        let b = raw(&grid, |p| (p[0] * p[1]).sin() + 0.25 * p[0]);
        // Difference 0.25·x₁: value sup over interior < 0.5, gradient 0.25, Hessian ~0.
        let d = discrete_c2_distance(&b, &a).unwrap();
        let max_x = grid.nodes()[grid.ntheta()..grid.len() - grid.ntheta()].iter().map(|p| p[0].abs()).fold(0.0, f64::max);
        assert_abs_diff_eq!(d, 0.25 * max_x + 0.25, epsilon = 1e-3);
    }

    #[test]
    fn snapshot_roundtrip_via_file() {
        let grid = ellipse_grid(8, 16);
        let f = ScalarField::from_fn(grid, 0.0, 0.3, |p| (p[0] * 1.7).cos() / 3.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.json");
        f.write_snapshot(&path).unwrap();
        let g = ScalarField::read_snapshot(&path, false).unwrap();
        assert_eq!(f.values(), g.values());
        assert_eq!(f.boundary_values(), g.boundary_values());
        assert!(f.grid().same_layout(g.grid()));
    }

    #[test]
    fn one_sided_boundary_gradient_is_second_order() {
        let exact = |r: f64| (2.0 / r).ln() / 2f64.ln();
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let grid = circle_grid(n, 2 * n);
                let f = raw(&grid, |p| exact((p[0] * p[0] + p[1] * p[1]).sqrt()));
                let jet = f.fd_jet(n, 0).unwrap();
                assert!(jet.one_sided);
                (jet.grad_norm() - 1.0 / 2f64.ln()).abs()
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.8, "errors {errs:?}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn c2_distance_is_a_metric(coeffs in proptest::collection::vec(-1.0f64..1.0, 9)) {
            let grid = ellipse_grid(8, 16);
            let field = |c: &[f64]| {
                let (a, b, k) = (c[0], c[1], c[2]);
                ScalarField::from_fn(grid.clone(), 0.0, 0.3, move |p| a * p[0] + b * (k * p[1]).sin() + 0.1 * p[0] * p[1]).unwrap()
            };
            let (f, g, h) = (field(&coeffs[0..3]), field(&coeffs[3..6]), field(&coeffs[6..9]));
            let fg = discrete_c2_distance(&f, &g).unwrap();
            proptest::prop_assert_eq!(fg, discrete_c2_distance(&g, &f).unwrap());
            proptest::prop_assert_eq!(discrete_c2_distance(&f, &f).unwrap(), 0.0);
            if coeffs[0..3] != coeffs[3..6] {
                proptest::prop_assert!(fg > 0.0);
            }
            let fh = discrete_c2_distance(&f, &h).unwrap();
            let gh = discrete_c2_distance(&g, &h).unwrap();
            proptest::prop_assert!(fh <= fg + gh + 1e-12);
        }
    }
}
