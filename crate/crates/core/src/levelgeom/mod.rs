//! Geometry of level sets: second fundamental form, σ_k curvatures, the
//! constant-rank test function, rank scans and the structure condition for a
//! prescribed mean curvature.

mod contour;
pub mod sigma;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::spaceform::{CoordinateSampler, PointJet, SpaceFormChart};

pub use contour::{extract_level, extract_level_with_jets, node_jets, LevelSetReport};
pub use sigma::{sigma_derivative, sigma_k, sigma_k_matrix};

pub const DEFAULT_GRAD_FLOOR: f64 = 1e-8;
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

fn require_gradient(jet: &PointJet, floor: f64) -> Result<f64> {
    let g = jet.grad_norm();
    if !(g > floor) {
        return Err(Error::SingularGradient { norm: g, floor });
    }
    Ok(g)
}

/// Axis least aligned with `e_n`; ties go to the lowest index.
fn default_seed(e_n: &DVector<f64>) -> usize {
    let mut best = 0;
    for i in 1..e_n.len() {
        if e_n[i].abs() < e_n[best].abs() {
            best = i;
        }
    }
    best
}

/// Orthonormal tangent frame `e_1..e_{n−1}` orthogonal to `e_n`, by
/// Gram–Schmidt over the coordinate axes starting at `seed`.
pub fn tangent_frame(e_n: &DVector<f64>, seed: usize) -> Vec<DVector<f64>> {
    let n = e_n.len();
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    let order = std::iter::once(seed).chain((0..n).filter(|&i| i != seed));
    for axis in order {
        if frame.len() == n - 1 {
            break;
        }
        let mut v = DVector::zeros(n);
        v[axis] = 1.0;
        v -= e_n * e_n.dot(&v);
        for f in &frame {
            v -= f * f.dot(&v);
        }
        let norm = v.norm();
        if norm > 1e-6 {
            frame.push(v / norm);
        }
    }
    frame
}

/// `h_ij = −u_ij/|∇u|` in the default tangent frame.
pub fn second_fundamental_form(jet: &PointJet) -> Result<DMatrix<f64>> {
    let g = require_gradient(jet, DEFAULT_GRAD_FLOOR)?;
    let e_n = &jet.grad / g;
    let seed = default_seed(&e_n);
    Ok(sff_in_frame(jet, g, &tangent_frame(&e_n, seed)))
}

/// Same, with the Gram–Schmidt seed axis chosen by the caller.
pub fn second_fundamental_form_seeded(jet: &PointJet, seed: usize, floor: f64) -> Result<DMatrix<f64>> {
    let g = require_gradient(jet, floor)?;
    if seed >= jet.dim() {
        return Err(Error::InvalidArgument(format!("seed axis {seed} out of range")));
    }
    let e_n = &jet.grad / g;
    Ok(sff_in_frame(jet, g, &tangent_frame(&e_n, seed)))
}

fn sff_in_frame(jet: &PointJet, g: f64, frame: &[DVector<f64>]) -> DMatrix<f64> {
    let m = frame.len();
    DMatrix::from_fn(m, m, |i, j| -(frame[i].transpose() * &jet.hess * &frame[j])[(0, 0)] / g)
}

/// Principal curvatures of the level set through the jet, ascending.
pub fn principal_curvatures(jet: &PointJet) -> Result<Vec<f64>> {
    let h = second_fundamental_form(jet)?;
    let mut eig: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Curvature of a planar level curve with respect to `∇u/|∇u|`.
pub fn level_curvature(jet: &PointJet, floor: f64) -> Result<f64> {
    let g = require_gradient(jet, floor)?;
    if jet.dim() != 2 {
        return Err(Error::InvalidArgument("level_curvature needs a two-dimensional jet".into()));
    }
    // Tangent (−g₂, g₁)/|g|.
    let t = [-jet.grad[1] / g, jet.grad[0] / g];
    let utt = t[0] * t[0] * jet.hess[(0, 0)] + 2.0 * t[0] * t[1] * jet.hess[(0, 1)] + t[1] * t[1] * jet.hess[(1, 1)];
    Ok(-utt / g)
}

/// `σ_k` of the level set from the Hessian directly:
/// `(−1)^k Σ ∂σ_{k+1}/∂u_αβ · u_α u_β · |∇u|^{−(k+2)}`.
pub fn sigma_k_level(jet: &PointJet, k: usize) -> Result<f64> {
    let n = jet.dim();
    if k < 1 || k > n - 1 {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={}", n - 1)));
    }
    let g = require_gradient(jet, DEFAULT_GRAD_FLOOR)?;
    let t = sigma_derivative(&jet.hess, k);
    let quad = (jet.grad.transpose() * t * &jet.grad)[(0, 0)];
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * quad / g.powi(k as i32 + 2))
}

/// `φ = |∇u|^{l+3} σ_{l+1}(κ)`.
pub fn phi_test(jet: &PointJet, l: usize) -> Result<f64> {
    let n = jet.dim();
    if l > n - 2 {
        return Err(Error::InvalidArgument(format!("l = {l} must lie in 0..={}", n - 2)));
    }
    let g = require_gradient(jet, DEFAULT_GRAD_FLOOR)?;
    let kappa = principal_curvatures(jet)?;
    Ok(g.powi(l as i32 + 3) * sigma_k(&kappa, l as isize + 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankScan {
    /// Smallest number of principal curvatures above the threshold.
    pub l_observed: usize,
    /// Largest such number; equal to `l_observed` when the rank is constant.
    pub l_max: usize,
    pub lambda_min: f64,
    pub lambda_min_at: Vec<f64>,
    pub threshold: f64,
    pub samples: usize,
    /// Points where the gradient fell below the floor.
    pub singular_points: Vec<Vec<f64>>,
}

impl RankScan {
    pub fn constant_rank(&self) -> bool {
        self.l_observed == self.l_max && self.singular_points.is_empty()
    }
}

/// Rank of the second fundamental form over a set of jets.
pub fn rank_scan(jets: &[PointJet], threshold: f64) -> RankScan {
    let per: Vec<std::result::Result<(usize, f64), ()>> = jets
        .par_iter()
        .map(|jet| match principal_curvatures(jet) {
            Ok(k) => Ok((k.iter().filter(|&&v| v > threshold).count(), k[0])),
            Err(_) => Err(()),
        })
        .collect();
    let mut scan = RankScan {
        l_observed: usize::MAX,
        l_max: 0,
        lambda_min: f64::INFINITY,
        lambda_min_at: Vec::new(),
        threshold,
        samples: jets.len(),
        singular_points: Vec::new(),
    };
    for (jet, r) in jets.iter().zip(per) {
        match r {
            Ok((rank, lmin)) => {
                scan.l_observed = scan.l_observed.min(rank);
                scan.l_max = scan.l_max.max(rank);
                if lmin < scan.lambda_min {
                    scan.lambda_min = lmin;
                    scan.lambda_min_at = jet.point.clone();
                }
            }
            Err(()) => scan.singular_points.push(jet.point.clone()),
        }
    }
    if scan.l_observed == usize::MAX {
        scan.l_observed = 0;
    }
    scan
}

/// Rank scan over the interior nodes of a field, default threshold `10·h²`.
pub fn rank_scan_field(field: &ScalarField, threshold: Option<f64>) -> Result<RankScan> {
    let h = field.grid().h_max();
    Ok(rank_scan(&field.interior_jets()?, threshold.unwrap_or(10.0 * h * h)))
}

/// Rank scan of an analytic field at the given points.
pub fn rank_scan_sampler(
    chart: &SpaceFormChart,
    sampler: &dyn CoordinateSampler,
    points: &[Vec<f64>],
    threshold: f64,
) -> Result<RankScan> {
    let jets = points.iter().map(|p| chart.covariant_jet(sampler, p)).collect::<Result<Vec<_>>>()?;
    Ok(rank_scan(&jets, threshold))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructurePoint {
    pub point: Vec<f64>,
    pub passed: bool,
    /// Smallest eigenvalue of `2H·∇²H − 3∇H⊗∇H − 4εH²I`.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub passed: bool,
    pub margin: f64,
    pub psd_tol: f64,
    pub points: Vec<StructurePoint>,
}

/// Tests `3H_αH_β + 4εH²δ_αβ ≤ 2H H_αβ` in the positive-semidefinite order.
pub fn structure_condition_check(
    h: &dyn CoordinateSampler,
    chart: &SpaceFormChart,
    points: &[Vec<f64>],
    psd_tol: f64,
) -> Result<StructureReport> {
    let eps = chart.epsilon();
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let jet = chart.covariant_jet(h, p)?;
        let n = jet.dim();
        let hv = jet.value;
        let m = &jet.hess * (2.0 * hv) - &jet.grad * jet.grad.transpose() * 3.0
            - DMatrix::identity(n, n) * (4.0 * eps * hv * hv);
        let m = (&m + m.transpose()) * 0.5;
        let margin = SymmetricEigen::new(m).eigenvalues.min();
        out.push(StructurePoint { point: p.clone(), passed: margin >= -psd_tol, margin });
    }
    let margin = out.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    Ok(StructureReport { passed: out.iter().all(|p| p.passed), margin, psd_tol, points: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaceform::{AnalyticSampler, CoordinateJet};
    use proptest::prelude::*;

    fn jet(grad: &[f64], hess: &[f64]) -> PointJet {
        let n = grad.len();
        PointJet::from_frame(vec![0.0; n], 0.0, DVector::from_column_slice(grad), DMatrix::from_row_slice(n, n, hess))
    }

    #[test]
    fn circle_level_has_unit_curvature() {
        // u = −|x|² at (1, 0).
        let j = jet(&[-2.0, 0.0], &[-2.0, 0.0, 0.0, -2.0]);
        let h = second_fundamental_form(&j).unwrap();
        assert_eq!(h.nrows(), 1);
        assert!((h[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((level_curvature(&j, 1e-8).unwrap() - 1.0).abs() < 1e-15);
        assert!((sigma_k_level(&j, 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_levels() {
        let j = jet(&[1.0, 0.0], &[0.0; 4]);
        assert_eq!(second_fundamental_form(&j).unwrap()[(0, 0)], 0.0);
        assert_eq!(phi_test(&j, 0).unwrap(), 0.0);
        let j3 = jet(&[1.0, 0.0, 0.0], &[0.0; 9]);
        assert_eq!(phi_test(&j3, 1).unwrap(), 0.0);
        assert_eq!(rank_scan(&[j, j3], 1e-8).l_observed, 0);
    }

    #[test]
    fn unit_sphere_level_in_three_dimensions() {
        // u = −|x|² at (1, 0, 0): |∇u| = 2, curvatures (1, 1).
        let j = jet(&[-2.0, 0.0, 0.0], &[-2.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, -2.0]);
        assert!((sigma_k_level(&j, 2).unwrap() - 1.0).abs() < 1e-14);
        assert!((phi_test(&j, 1).unwrap() - 16.0).abs() < 1e-12);
        let k = principal_curvatures(&j).unwrap();
        assert!((k[0] - 1.0).abs() < 1e-14 && (k[1] - 1.0).abs() < 1e-14);
        assert_eq!(rank_scan(&[j], 1e-8).l_observed, 2);
    }

    #[test]
    fn singular_gradient_is_an_error() {
        let j = jet(&[1e-9, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(second_fundamental_form(&j), Err(Error::SingularGradient { .. })));
        assert!(sigma_k_level(&j, 1).is_err());
        assert!(phi_test(&j, 0).is_err());
        let scan = rank_scan(&[j], 1e-8);
        assert_eq!(scan.singular_points.len(), 1);
        assert!(!scan.constant_rank());
    }

    #[test]
    fn argument_ranges() {
        let j = jet(&[1.0, 0.0], &[0.0; 4]);
        assert!(sigma_k_level(&j, 0).is_err());
        assert!(sigma_k_level(&j, 2).is_err());
        assert!(phi_test(&j, 1).is_err());
    }

    #[test]
    fn seed_prefers_least_aligned_axis() {
        let e = DVector::from_column_slice(&[0.6, 0.8, 0.0]);
        assert_eq!(default_seed(&e), 2);
        let e = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
        assert_eq!(default_seed(&e), 0);
    }

    fn constant_h(value: f64) -> impl CoordinateSampler {
        AnalyticSampler::new(2, move |_x: &[f64]| CoordinateJet { value, grad: DVector::zeros(2), hess: DMatrix::zeros(2, 2) })
    }

    #[test]
    fn structure_condition_examples() {
        let pts = vec![vec![0.1, 0.2], vec![-0.3, 0.05], vec![0.0, 0.0]];
        let flat = SpaceFormChart::new(0.0, 2).unwrap();
        let sphere = SpaceFormChart::new(1.0, 2).unwrap();
        let zero = structure_condition_check(&constant_h(0.0), &flat, &pts, DEFAULT_PSD_TOL).unwrap();
        assert!(zero.passed);
        assert_eq!(zero.margin, 0.0);
        let c = structure_condition_check(&constant_h(0.7), &flat, &pts, DEFAULT_PSD_TOL).unwrap();
        assert!(c.passed);
        let s = structure_condition_check(&constant_h(0.7), &sphere, &pts, DEFAULT_PSD_TOL).unwrap();
        assert!(!s.passed);
        assert!((s.margin + 4.0 * 0.49).abs() < 1e-12);
    }

    #[test]
    fn structure_condition_detects_off_diagonal_violation() {
        // H = 1 + x₁x₂: at the origin 2H∇²H has off-diagonal 2 and zero diagonal.
        let h = AnalyticSampler::new(2, |x: &[f64]| CoordinateJet {
            value: 1.0 + x[0] * x[1],
            grad: DVector::from_column_slice(&[x[1], x[0]]),
            hess: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        });
        let flat = SpaceFormChart::new(0.0, 2).unwrap();
        let r = structure_condition_check(&h, &flat, &[vec![0.0, 0.0]], DEFAULT_PSD_TOL).unwrap();
        assert!(!r.passed);
        assert!((r.margin + 2.0).abs() < 1e-12);
    }

    fn random_jet(n: usize, vals: &[f64]) -> PointJet {
        let grad = DVector::from_column_slice(&vals[..n]);
        let mut hess = DMatrix::zeros(n, n);
        let mut k = n;
        for i in 0..n {
            for j in 0..=i {
                hess[(i, j)] = vals[k];
                hess[(j, i)] = vals[k];
                k += 1;
            }
        }
        PointJet::from_frame(vec![0.0; n], 0.0, grad, hess)
    }

    proptest! {
        #[test]
        fn routes_agree(vals in proptest::collection::vec(-3.0f64..3.0, 9), n in 2usize..4) {
            let j = random_jet(n, &vals);
            prop_assume!(j.grad_norm() >= 0.1);
            for k in 1..n {
                let direct = sigma_k_level(&j, k).unwrap();
                let via = sigma_k(&principal_curvatures(&j).unwrap(), k as isize);
                prop_assert!((direct - via).abs() < 1e-10 * (1.0 + via.abs()));
            }
        }

        #[test]
        fn eigenvalues_do_not_depend_on_seed(vals in proptest::collection::vec(-3.0f64..3.0, 9)) {
            let j = random_jet(3, &vals);
            prop_assume!(j.grad_norm() >= 0.1);
            let mut reference: Option<Vec<f64>> = None;
            for seed in 0..3 {
                let h = second_fundamental_form_seeded(&j, seed, 1e-8).unwrap();
                let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
                e.sort_by(f64::total_cmp);
                if let Some(r) = &reference {
                    for (a, b) in r.iter().zip(&e) {
                        prop_assert!((a - b).abs() < 1e-10);
                    }
                } else {
                    reference = Some(e);
                }
            }
        }

        #[test]
        fn scaling_law(vals in proptest::collection::vec(-3.0f64..3.0, 5), a in 0.1f64..10.0) {
            let j = random_jet(2, &vals);
            prop_assume!(j.grad_norm() >= 0.1);
            let scaled = PointJet::from_frame(j.point.clone(), a * j.value, &j.grad * a, &j.hess * a);
            let k0 = principal_curvatures(&j).unwrap();
            let k1 = principal_curvatures(&scaled).unwrap();
            prop_assert!((k0[0] - k1[0]).abs() < 1e-10 * (1.0 + k0[0].abs()));
            let p0 = phi_test(&j, 0).unwrap();
            let p1 = phi_test(&scaled, 0).unwrap();
            prop_assert!((p1 - a.powi(3) * p0).abs() < 1e-9 * (1.0 + p1.abs()));
        }
    }
}
