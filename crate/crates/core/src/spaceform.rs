//! Space forms of constant sectional curvature in one conformal chart.
//!
//! The metric is `g = λ(x)² |dx|²` with `λ(x) = 1 / (1 + (ε/4)|x|²)`. For
//! `ε = 0` this is the Euclidean chart, for `ε > 0` the stereographic model
//! of the sphere of curvature `ε` (one hemisphere is `|x| < 2/√ε`).
//!
//! All geometric quantities handed to the level-set code are expressed in
//! the orthonormal frame `e_α = λ⁻¹ ∂_α`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Curvature and dimension of the modelled space form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub epsilon: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_dim() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceFormChart {
    epsilon: f64,
    dim: usize,
    chart_radius: f64,
}

impl SpaceFormChart {
    /// Chart for `ε ≥ 0`. Negative curvature is only available through
    /// [`SpaceFormChart::experimental`].
    pub fn new(epsilon: f64, dim: usize) -> Result<Self> {
        if epsilon < 0.0 {
            return Err(Error::InvalidChart(format!(
                "epsilon = {epsilon} < 0 is outside the supported range; \
                 use the experimental constructor to enable it"
            )));
        }
        Self::experimental(epsilon, dim)
    }

    /// Accepts any finite `ε`. Negative curvature is experimental: the
    /// formulas hold, the convexity results do not.
    pub fn experimental(epsilon: f64, dim: usize) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::InvalidChart(format!("epsilon must be finite, got {epsilon}")));
        }
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidChart(format!("dim must be 2 or 3, got {dim}")));
        }
        let chart_radius = if epsilon == 0.0 {
            f64::INFINITY
        } else {
            0.999 * 2.0 / epsilon.abs().sqrt()
        };
        Ok(Self { epsilon, dim, chart_radius })
    }

    pub fn from_spec(spec: &ChartSpec, allow_negative: bool) -> Result<Self> {
        if allow_negative {
            Self::experimental(spec.epsilon, spec.dim)
        } else {
            Self::new(spec.epsilon, spec.dim)
        }
    }

    /// Restricts the accepted chart ball. For `ε ≠ 0` the radius must stay
    /// below `2/√|ε|`.
    pub fn with_chart_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidChart(format!("chart radius must be positive, got {radius}")));
        }
        if self.epsilon != 0.0 && radius >= 2.0 / self.epsilon.abs().sqrt() {
            return Err(Error::InvalidChart(format!(
                "chart radius {radius} must be below 2/sqrt(|epsilon|) = {}",
                2.0 / self.epsilon.abs().sqrt()
            )));
        }
        self.chart_radius = radius;
        Ok(self)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chart_radius(&self) -> f64 {
        self.chart_radius
    }

    pub fn spec(&self) -> ChartSpec {
        ChartSpec { epsilon: self.epsilon, dim: self.dim }
    }

    pub fn is_experimental(&self) -> bool {
        self.epsilon < 0.0
    }

    pub fn is_flat(&self) -> bool {
        self.epsilon == 0.0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        norm_sq(x).sqrt() <= self.chart_radius
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, chart dimension is {}",
                x.len(),
                self.dim
            )));
        }
        if !self.contains(x) {
            return Err(Error::ChartDomain { point: x.to_vec(), radius: self.chart_radius });
        }
        Ok(())
    }

    /// `λ(x)` without the domain check; callers guarantee `x` is in the ball.
    #[inline]
    pub(crate) fn lambda_unchecked(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + 0.25 * self.epsilon * norm_sq(x))
    }

    pub fn conformal_factor(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.lambda_unchecked(x))
    }

    /// `∂_α log λ = −(ε/2) λ x_α`.
    pub fn log_factor_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let lam = self.lambda_unchecked(x);
        Ok(x.iter().map(|&xa| -0.5 * self.epsilon * lam * xa).collect())
    }

    /// `∂_α∂_β log λ = −(ε/2) λ δ_αβ + (ε²/4) λ² x_α x_β`.
    fn log_factor_hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let lam = self.lambda_unchecked(x);
        let e = self.epsilon;
        DMatrix::from_fn(n, n, |a, b| {
            let diag = if a == b { -0.5 * e * lam } else { 0.0 };
            diag + 0.25 * e * e * lam * lam * x[a] * x[b]
        })
    }

    pub fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        let dphi = self.log_factor_gradient(x)?;
        Ok(Christoffel::from_log_gradient(&dphi))
    }

    /// Turns coordinate derivatives into a [`PointJet`] in the orthonormal
    /// frame, applying the Christoffel correction to the Hessian.
    pub fn covariant_jet(&self, sampler: &dyn CoordinateSampler, x: &[f64]) -> Result<PointJet> {
        self.check(x)?;
        let cj = sampler.sample(x);
        self.covariant_jet_from(x, &cj, false)
    }

    pub fn covariant_jet_from(&self, x: &[f64], cj: &CoordinateJet, one_sided: bool) -> Result<PointJet> {
        self.check(x)?;
        let n = x.len();
        if cj.grad.len() != n || cj.hess.nrows() != n || cj.hess.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "coordinate jet dimension does not match point dimension {n}"
            )));
        }
        let lam = self.lambda_unchecked(x);
        let mut hess = cj.hess.clone();
        if self.epsilon != 0.0 {
            let gamma = self.christoffel(x)?;
            for a in 0..n {
                for b in 0..n {
                    let corr: f64 = (0..n).map(|g| gamma.get(g, a, b) * cj.grad[g]).sum();
                    hess[(a, b)] -= corr;
                }
            }
            hess /= lam * lam;
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        let grad = &cj.grad / lam;
        Ok(PointJet { point: x.to_vec(), value: cj.value, grad, hess, one_sided })
    }

    /// Sectional curvature of the coordinate plane `(a, b)` from the conformal
    /// curvature formula `K = λ⁻²(−φ_aa − φ_bb + φ_a² + φ_b² − |∇φ|²)`,
    /// `φ = log λ`.
    pub fn sectional_curvature(&self, x: &[f64], a: usize, b: usize) -> Result<f64> {
        self.check(x)?;
        if a == b || a >= x.len() || b >= x.len() {
            return Err(Error::InvalidArgument(format!("invalid coordinate plane ({a}, {b})")));
        }
        let lam = self.lambda_unchecked(x);
        let dphi = self.log_factor_gradient(x)?;
        let hphi = self.log_factor_hessian(x);
        let grad_sq: f64 = dphi.iter().map(|d| d * d).sum();
        let k = -hphi[(a, a)] - hphi[(b, b)] + dphi[a] * dphi[a] + dphi[b] * dphi[b] - grad_sq;
        Ok(k / (lam * lam))
    }

    /// Sectional curvature of the `(0, 1)` plane at `x`; equals `ε`.
    pub fn sectional_curvature_probe(&self, x: &[f64]) -> Result<f64> {
        self.sectional_curvature(x, 0, 1)
    }
}

/// Christoffel symbols `Γ^γ_{αβ}` of the conformal metric.
#[derive(Clone, Debug)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    fn from_log_gradient(dphi: &[f64]) -> Self {
        let n = dphi.len();
        let mut data = vec![0.0; n * n * n];
        let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        for g in 0..n {
            for a in 0..n {
                for b in 0..n {
                    data[(g * n + a) * n + b] =
                        delta(g, a) * dphi[b] + delta(g, b) * dphi[a] - delta(a, b) * dphi[g];
                }
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Γ^upper_{a b}`.
    #[inline]
    pub fn get(&self, upper: usize, a: usize, b: usize) -> f64 {
        self.data[(upper * self.n + a) * self.n + b]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Value and coordinate derivatives up to order two.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

/// Value, gradient and covariant Hessian at a point, in the orthonormal
/// frame `λ⁻¹ ∂_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointJet {
    pub point: Vec<f64>,
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    /// Set when the derivatives came from one-sided stencils.
    pub one_sided: bool,
}

impl PointJet {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad.norm()
    }

    /// Builds a jet directly from frame components (synthetic jets for tests
    /// and analytic work).
    pub fn from_frame(point: Vec<f64>, value: f64, grad: DVector<f64>, hess: DMatrix<f64>) -> Self {
        Self { point, value, grad, hess, one_sided: false }
    }

    /// Linear blend `(1−t)·self + t·other` of two jets of equal dimension.
    pub fn lerp(&self, other: &PointJet, t: f64) -> PointJet {
        let point = self.point.iter().zip(&other.point).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        PointJet {
            point,
            value: (1.0 - t) * self.value + t * other.value,
            grad: &self.grad * (1.0 - t) + &other.grad * t,
            hess: &self.hess * (1.0 - t) + &other.hess * t,
            one_sided: self.one_sided || other.one_sided,
        }
    }
}

/// Source of coordinate jets: analytic formulas or finite differences.
pub trait CoordinateSampler: Sync {
    fn dim(&self) -> usize;
    fn sample(&self, x: &[f64]) -> CoordinateJet;
}

/// Wraps a closure returning full coordinate jets.
pub struct AnalyticSampler<F> {
    dim: usize,
    f: F,
}

impl<F> AnalyticSampler<F>
where
    F: Fn(&[f64]) -> CoordinateJet + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> CoordinateSampler for AnalyticSampler<F>
where
    F: Fn(&[f64]) -> CoordinateJet + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, x: &[f64]) -> CoordinateJet {
        (self.f)(x)
    }
}

/// Central finite differences of a scalar function with step `h`.
pub struct FdSampler<F> {
    dim: usize,
    step: f64,
    f: F,
}

impl<F> FdSampler<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(dim: usize, step: f64, f: F) -> Self {
        Self { dim, step, f }
    }
}

impl<F> CoordinateSampler for FdSampler<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, x: &[f64]) -> CoordinateJet {
        let n = x.len();
        let h = self.step;
        let eval = |shifts: &[(usize, f64)]| {
            let mut y = x.to_vec();
            for &(i, d) in shifts {
                y[i] += d;
            }
            (self.f)(&y)
        };
        let f0 = (self.f)(x);
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            let fp = eval(&[(i, h)]);
            let fm = eval(&[(i, -h)]);
            grad[i] = (fp - fm) / (2.0 * h);
            hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in 0..i {
                let v = (eval(&[(i, h), (j, h)]) - eval(&[(i, h), (j, -h)]) - eval(&[(i, -h), (j, h)])
                    + eval(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        CoordinateJet { value: f0, grad, hess }
    }
}

#[inline]
pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn linear_x1(dim: usize) -> impl CoordinateSampler {
        AnalyticSampler::new(dim, move |x: &[f64]| CoordinateJet {
            value: x[0],
            grad: DVector::from_fn(dim, |i, _| if i == 0 { 1.0 } else { 0.0 }),
            hess: DMatrix::zeros(dim, dim),
        })
    }

    #[test]
    fn conformal_factor_examples() {
        let flat = SpaceFormChart::new(0.0, 2).unwrap();
        assert_eq!(flat.conformal_factor(&[3.0, 4.0]).unwrap(), 1.0);
        let sphere = SpaceFormChart::new(1.0, 2).unwrap();
        assert_eq!(sphere.conformal_factor(&[0.0, 0.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(sphere.conformal_factor(&[1.0, 0.0]).unwrap(), 0.8, epsilon = 1e-15);
        let wide = SpaceFormChart::new(1.0, 2).unwrap();
        assert!(wide.conformal_factor(&[2.5, 0.0]).is_err());
    }

    #[test]
    fn conformal_factor_half_at_unit_sphere_equatorial_distance() {
        // (2, 0) is on the boundary |x| = 2/√ε of the hemisphere chart, so the
        // checked entry point rejects it; the formula itself gives 1/(1 + 4/4).
        let chart = SpaceFormChart::new(1.0, 2).unwrap();
        assert!(matches!(chart.conformal_factor(&[2.0, 0.0]), Err(Error::ChartDomain { .. })));
        assert_abs_diff_eq!(chart.lambda_unchecked(&[2.0, 0.0]), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn negative_curvature_requires_experimental_constructor() {
        assert!(SpaceFormChart::new(-1.0, 2).is_err());
        let c = SpaceFormChart::experimental(-1.0, 2).unwrap();
        assert!(c.is_experimental());
        assert!(SpaceFormChart::new(1.0, 4).is_err());
    }

    #[test]
    fn christoffel_examples() {
        let flat = SpaceFormChart::new(0.0, 3).unwrap();
        assert_eq!(flat.christoffel(&[0.3, -1.0, 2.0]).unwrap().max_abs(), 0.0);
        let sphere = SpaceFormChart::new(1.0, 2).unwrap();
        assert_eq!(sphere.christoffel(&[0.0, 0.0]).unwrap().max_abs(), 0.0);
        let g = sphere.christoffel(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g.get(0, 0, 0), -0.4, epsilon = 1e-15);
        // Cross-check ∂₁ log λ by central differences.
        let h = 1e-5;
        let fd = (sphere.lambda_unchecked(&[1.0 + h, 0.0]).ln() - sphere.lambda_unchecked(&[1.0 - h, 0.0]).ln())
            / (2.0 * h);
        assert_abs_diff_eq!(g.get(0, 0, 0), fd, epsilon = 1e-9);
        for u in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    assert_eq!(g.get(u, a, b), g.get(u, b, a));
                }
            }
        }
    }

    #[test]
    fn covariant_jet_flat_examples() {
        let flat = SpaceFormChart::new(0.0, 2).unwrap();
        let jet = flat.covariant_jet(&linear_x1(2), &[0.7, -0.2]).unwrap();
        assert_eq!(jet.grad.as_slice(), &[1.0, 0.0]);
        assert_eq!(jet.hess.iter().fold(0.0f64, |m, v| m.max(v.abs())), 0.0);

        let quad = AnalyticSampler::new(2, |x: &[f64]| CoordinateJet {
            value: 0.5 * norm_sq(x),
            grad: DVector::from_column_slice(x),
            hess: DMatrix::identity(2, 2),
        });
        let jet = flat.covariant_jet(&quad, &[1.0, 0.0]).unwrap();
        assert_eq!(jet.grad.as_slice(), &[1.0, 0.0]);
        assert_eq!(jet.hess, DMatrix::identity(2, 2));
    }

    #[test]
    fn covariant_jet_sphere_linear_function() {
        let chart = SpaceFormChart::new(1.0, 2).unwrap();
        let jet = chart.covariant_jet(&linear_x1(2), &[1.0, 0.0]).unwrap();
        // λ = 0.8, Γ¹₁₁ = −0.4, Γ¹₂₂ = 0.4, Γ¹₁₂ = 0.
        assert_abs_diff_eq!(jet.grad[0], 1.25, epsilon = 1e-14);
        assert_abs_diff_eq!(jet.hess[(0, 0)], 0.4 / 0.64, epsilon = 1e-14);
        assert_abs_diff_eq!(jet.hess[(1, 1)], -0.4 / 0.64, epsilon = 1e-14);
        assert_abs_diff_eq!(jet.hess[(0, 1)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sectional_curvature_examples() {
        let flat = SpaceFormChart::new(0.0, 2).unwrap();
        assert_eq!(flat.sectional_curvature_probe(&[1.0, 1.0]).unwrap(), 0.0);
        let s1 = SpaceFormChart::new(1.0, 2).unwrap();
        assert_abs_diff_eq!(s1.sectional_curvature_probe(&[0.5, 0.0]).unwrap(), 1.0, epsilon = 1e-10);
        let s2 = SpaceFormChart::new(2.0, 2).unwrap();
        assert_abs_diff_eq!(s2.sectional_curvature_probe(&[0.1, 0.2]).unwrap(), 2.0, epsilon = 1e-10);
        let s3 = SpaceFormChart::new(0.7, 3).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let k = s3.sectional_curvature(&[0.3, -0.4, 0.9], a, b).unwrap();
            assert_abs_diff_eq!(k, 0.7, epsilon = 1e-10);
        }
    }

    #[test]
    fn hessian_is_symmetric() {
        let chart = SpaceFormChart::new(1.3, 3).unwrap();
        let s = AnalyticSampler::new(3, |x: &[f64]| CoordinateJet {
            value: x[0] * x[1] + x[2].powi(3),
            grad: DVector::from_vec(vec![x[1], x[0], 3.0 * x[2] * x[2]]),
            hess: DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 6.0 * x[2]]),
        });
        let jet = chart.covariant_jet(&s, &[0.2, 0.5, -0.3]).unwrap();
        let asym = (&jet.hess - jet.hess.transpose()).abs().max();
        assert!(asym < 1e-12);
    }

    fn trig(dim: usize) -> impl Fn(&[f64]) -> f64 + Sync {
        move |x: &[f64]| x[0].sin() * x[1].cos() + x[0] * x[0] * x[1] + if dim == 3 { x[2] * x[0] } else { 0.0 }
    }

    fn trig_jet(dim: usize) -> impl CoordinateSampler {
        AnalyticSampler::new(dim, move |x: &[f64]| {
            let (s0, c0, s1, c1) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
            let mut grad = DVector::zeros(dim);
            let mut hess = DMatrix::zeros(dim, dim);
            grad[0] = c0 * c1 + 2.0 * x[0] * x[1];
            grad[1] = -s0 * s1 + x[0] * x[0];
            hess[(0, 0)] = -s0 * c1 + 2.0 * x[1];
            hess[(1, 1)] = -s0 * c1;
            hess[(0, 1)] = -c0 * s1 + 2.0 * x[0];
            hess[(1, 0)] = hess[(0, 1)];
            if dim == 3 {
                grad[0] += x[2];
                grad[2] = x[0];
                hess[(0, 2)] = 1.0;
                hess[(2, 0)] = 1.0;
            }
            CoordinateJet { value: trig(dim)(x), grad, hess }
        })
    }

    #[test]
    fn finite_difference_sampler_converges_at_second_order() {
        for (eps, dim) in [(0.0, 2), (1.0, 2), (0.7, 3)] {
            let chart = SpaceFormChart::new(eps, dim).unwrap();
            let x = vec![0.21, -0.13, 0.17][..dim].to_vec();
            let exact = chart.covariant_jet(&trig_jet(dim), &x).unwrap();
            let errs: Vec<f64> = [0.04, 0.02, 0.01]
                .iter()
                .map(|&h| {
                    let fd = chart.covariant_jet(&FdSampler::new(dim, h, trig(dim)), &x).unwrap();
                    (&fd.grad - &exact.grad).amax().max((&fd.hess - &exact.hess).amax())
                })
                .collect();
            for w in errs.windows(2) {
                assert!((w[0] / w[1]).log2() >= 1.9, "eps {eps}, dim {dim}: {errs:?}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn probe_returns_the_curvature(eps in 0.0f64..3.0, dim in 2usize..4, dir in proptest::collection::vec(-1.0f64..1.0, 3), t in 0.0f64..0.9) {
            let chart = SpaceFormChart::new(eps, dim).unwrap();
            let norm = dir[..dim].iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
            let radius = if eps > 0.0 { 0.5 / eps.sqrt() } else { 5.0 };
            let x: Vec<f64> = dir[..dim].iter().map(|v| v / norm * t * radius).collect();
            let k = chart.sectional_curvature_probe(&x).unwrap();
            proptest::prop_assert!((k - eps).abs() < 1e-8, "{} vs {}", k, eps);
        }

        #[test]
        fn flat_chart_is_exactly_euclidean(vals in proptest::collection::vec(-5.0f64..5.0, 9), x in proptest::collection::vec(-3.0f64..3.0, 2)) {
            let chart = SpaceFormChart::new(0.0, 2).unwrap();
            let cj = CoordinateJet {
                value: vals[0],
                grad: DVector::from_vec(vals[1..3].to_vec()),
                hess: DMatrix::from_row_slice(2, 2, &[vals[3], vals[4], vals[4], vals[5]]),
            };
            let jet = chart.covariant_jet_from(&x, &cj, false).unwrap();
            proptest::prop_assert_eq!(jet.value, cj.value);
            proptest::prop_assert_eq!(jet.grad, cj.grad);
            proptest::prop_assert_eq!(jet.hess, cj.hess);
            proptest::prop_assert!(chart.christoffel(&x).unwrap().max_abs() == 0.0);
        }
    }
}
