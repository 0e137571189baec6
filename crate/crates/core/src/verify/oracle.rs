//! Radially symmetric minimal graphs over concentric annuli in flat space.
//!
//! The radial equation has the first integral `r^m u'/√(1+u'²) = −c`,
//! `m = n − 1`, so `|u'| = c/√(r^{2m} − c²)`. The height integral is
//! evaluated after substituting `r^m = c·cosh v`, which removes the endpoint
//! singularity at `r^m = c`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::ring::AnnularGrid;
use crate::spaceform::{CoordinateJet, PointJet, SpaceFormChart};

const QUAD_TOL: f64 = 1e-12;

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 48)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialOracle {
    pub r_inner: f64,
    pub r_outer: f64,
    pub tau: f64,
    pub dim: usize,
    /// Flux constant `c` with `0 ≤ c ≤ R₁^{n−1}`.
    pub flux: f64,
    /// Largest attainable height on this annulus.
    pub max_height: f64,
}

/// `∫_{r_a}^{r_b} c/√(r^{2m} − c²) dr` with `r_a ≥ c^{1/m}`.
fn height_between(c: f64, m: f64, r_a: f64, r_b: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let va = (r_a.powf(m) / c).max(1.0).acosh();
    let vb = (r_b.powf(m) / c).max(1.0).acosh();
    let e = (m - 1.0) / m;
    adaptive_simpson(|v| c / (m * (c * v.cosh()).powf(e)), va, vb, QUAD_TOL)
}

pub fn radial_oracle(r_inner: f64, r_outer: f64, tau: f64, dim: usize) -> Result<RadialOracle> {
    if !(r_inner > 0.0 && r_outer > r_inner && r_outer.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 < R1 < R0, got R1 = {r_inner}, R0 = {r_outer}")));
    }
    if !(dim == 2 || dim == 3) {
        return Err(Error::InvalidArgument(format!("dimension {dim} is not 2 or 3")));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be nonnegative, got {tau}")));
    }
    let m = (dim - 1) as f64;
    let c_max = r_inner.powf(m);
    let height = |c: f64| height_between(c, m, r_inner, r_outer);
    let max_height = height(c_max);
    if tau > max_height {
        return Err(Error::OracleInfeasible { tau, max_height });
    }
    let flux = if tau == 0.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, c_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if height(mid) < tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    Ok(RadialOracle { r_inner, r_outer, tau, dim, flux, max_height })
}

impl RadialOracle {
    fn m(&self) -> f64 {
        (self.dim - 1) as f64
    }

    /// `u(r) = ∫_r^{R₀} c/√(s^{2m} − c²) ds`.
    pub fn value(&self, r: f64) -> f64 {
        height_between(self.flux, self.m(), r, self.r_outer)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let c = self.flux;
        -c / (r.powf(2.0 * self.m()) - c * c).sqrt()
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        let c = self.flux;
        let m = self.m();
        c * m * r.powf(2.0 * m - 1.0) / (r.powf(2.0 * m) - c * c).powf(1.5)
    }

    pub fn coordinate_jet(&self, x: &[f64]) -> CoordinateJet {
        let n = x.len();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let d1 = self.derivative(r);
        let d2 = self.second_derivative(r);
        let xhat = DVector::from_iterator(n, x.iter().map(|v| v / r));
        let proj = &xhat * xhat.transpose();
        CoordinateJet {
            value: self.value(r),
            grad: &xhat * d1,
            hess: &proj * d2 + (DMatrix::identity(n, n) - &proj) * (d1 / r),
        }
    }

    pub fn point_jet(&self, x: &[f64]) -> Result<PointJet> {
        let chart = SpaceFormChart::new(0.0, self.dim)?;
        chart.covariant_jet_from(x, &self.coordinate_jet(x), false)
    }

    /// Nodal samples with boundary rows exactly `(0, τ)`.
    pub fn sample(&self, grid: &Arc<AnnularGrid>) -> Result<ScalarField> {
        let r = |p: [f64; 2]| (p[0] * p[0] + p[1] * p[1]).sqrt();
        ScalarField::from_fn(grid.clone(), 0.0, self.tau, |p| self.value(r(p)))
    }

    /// Rows `(r, u, u', u'')` at `count` evenly spaced radii.
    pub fn table(&self, count: usize) -> Vec<[f64; 4]> {
        let count = count.max(2);
        (0..count)
            .map(|k| {
                let r = self.r_inner + (self.r_outer - self.r_inner) * k as f64 / (count - 1) as f64;
                [r, self.value(r), self.derivative(r), self.second_derivative(r)]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form_height(c: f64, r1: f64, r0: f64) -> f64 {
        c * ((r0 / c).acosh() - (r1 / c).acosh())
    }

    #[test]
    fn quadrature_matches_closed_form_in_two_dimensions() {
        let h = height_between(0.5, 1.0, 1.0, 2.0);
        assert!((h - closed_form_height(0.5, 1.0, 2.0)).abs() < 1e-11);
        assert!((h - 0.3732).abs() < 1e-4);
    }

    #[test]
    fn zero_flux_is_flat() {
        let o = radial_oracle(1.0, 2.0, 0.0, 2).unwrap();
        assert_eq!(o.flux, 0.0);
        assert_eq!(o.value(1.5), 0.0);
        assert!(height_between(1e-9, 1.0, 1.0, 2.0) < 1e-8);
    }

    #[test]
    fn boundary_values_and_flux_bounds() {
        for &(tau, n) in &[(0.25, 2), (0.5, 2), (1.0, 2), (0.3, 3)] {
            let o = radial_oracle(1.0, 2.0, tau, n).unwrap();
            assert!(o.flux > 0.0 && o.flux < 1.0);
            assert!(o.value(2.0).abs() < 1e-12);
            assert!((o.value(1.0) - tau).abs() < 1e-12);
        }
    }

    #[test]
    fn known_flux_constants() {
        for &(tau, c) in &[(0.25, 0.34852), (0.5, 0.63482), (1.0, 0.94999)] {
            let o = radial_oracle(1.0, 2.0, tau, 2).unwrap();
            assert!((o.flux - c).abs() < 1e-5, "{} vs {c}", o.flux);
        }
    }

    #[test]
    fn infeasible_height() {
        let err = radial_oracle(1.0, 2.0, 1.4, 2).unwrap_err();
        match err {
            Error::OracleInfeasible { max_height, .. } => assert!((max_height - 2f64.acosh()).abs() < 1e-10),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn satisfies_radial_equation() {
        // (r^m u'/W)' = 0, checked by finite differences.
        for n in [2, 3] {
            let o = radial_oracle(1.0, 2.0, 0.4, n).unwrap();
            let m = (n - 1) as f64;
            let flux = |r: f64| {
                let d = o.derivative(r);
                r.powf(m) * d / (1.0 + d * d).sqrt()
            };
            for r in [1.1, 1.5, 1.9] {
                assert!((flux(r) + o.flux).abs() < 1e-12);
                let h = 1e-5;
                let du = (o.value(r + h) - o.value(r - h)) / (2.0 * h);
                assert!((du - o.derivative(r)).abs() < 1e-8);
                let d2 = (o.derivative(r + h) - o.derivative(r - h)) / (2.0 * h);
                assert!((d2 - o.second_derivative(r)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn jet_of_three_dimensional_oracle_has_spherical_levels() {
        let o = radial_oracle(1.0, 2.0, 0.3, 3).unwrap();
        let jet = o.point_jet(&[0.6, 0.8, 0.9]).unwrap();
        let k = crate::levelgeom::principal_curvatures(&jet).unwrap();
        let r = (0.36f64 + 0.64 + 0.81).sqrt();
        assert!((k[0] - 1.0 / r).abs() < 1e-10 && (k[1] - 1.0 / r).abs() < 1e-10);
    }
}
