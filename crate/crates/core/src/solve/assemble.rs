//! Conservative flux-form discretization of `∂_α(k ∂_α u)` on the mapped
//! grid, with `k = λ^{n−2}` (harmonic) or `k = λ^{n−2}/W` (minimal graph).

use rayon::prelude::*;

use crate::field::ScalarField;
use crate::linalg::StencilMatrix;
use crate::ring::AnnularGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    Harmonic,
    MinimalGraph,
}

/// Metric data at one face.
#[derive(Clone, Copy, Debug)]
struct FaceMetric {
    alpha_s: f64,
    beta: f64,
    alpha_t: f64,
    jac: f64,
    lambda: f64,
}

/// Precomputed face and node metric terms of a grid.
pub struct FluxGeometry {
    ns: usize,
    nt: usize,
    ds: f64,
    dt: f64,
    dim: i32,
    /// s-faces `(i+½, j)` for `i < ns`.
    s_faces: Vec<FaceMetric>,
    /// θ-faces `(i, j+½)` for interior rows, indexed by `(i−1)·nt + j`.
    t_faces: Vec<FaceMetric>,
    /// `J` at interior nodes.
    node_jac: Vec<f64>,
    /// `λⁿ` at interior nodes.
    node_lambda_n: Vec<f64>,
}

fn face_metric(grid: &AnnularGrid, s: f64, theta: f64) -> FaceMetric {
    let d = grid.map_derivatives(s, theta);
    let jac = d.det();
    let xs2 = d.xs[0] * d.xs[0] + d.xs[1] * d.xs[1];
    let xt2 = d.xt[0] * d.xt[0] + d.xt[1] * d.xt[1];
    let cross = d.xs[0] * d.xt[0] + d.xs[1] * d.xt[1];
    FaceMetric {
        alpha_s: xt2 / jac,
        beta: -cross / jac,
        alpha_t: xs2 / jac,
        jac,
        lambda: grid.chart().lambda_unchecked(&d.x),
    }
}

impl FluxGeometry {
    pub fn new(grid: &AnnularGrid) -> Self {
        let (ns, nt) = (grid.ns(), grid.ntheta());
        let ds = grid.ds();
        let dt = grid.dtheta();
        let s_faces = (0..ns * nt)
            .into_par_iter()
            .map(|k| face_metric(grid, (k / nt) as f64 * ds + 0.5 * ds, grid.theta(k % nt)))
            .collect();
        let t_faces = (0..(ns - 1) * nt)
            .into_par_iter()
            .map(|k| face_metric(grid, grid.s(k / nt + 1), grid.theta(k % nt) + 0.5 * dt))
            .collect();
        let n = grid.chart().dim() as i32;
        let mut node_jac = Vec::with_capacity((ns - 1) * nt);
        let mut node_lambda_n = Vec::with_capacity((ns - 1) * nt);
        for i in 1..ns {
            for j in 0..nt {
                let d = grid.map_derivatives(grid.s(i), grid.theta(j));
                node_jac.push(d.det());
                node_lambda_n.push(grid.chart().lambda_unchecked(&d.x).powi(n));
            }
        }
        Self { ns, nt, ds, dt, dim: n, s_faces, t_faces, node_jac, node_lambda_n }
    }

    pub fn unknowns(&self) -> usize {
        (self.ns - 1) * self.nt
    }

    /// `λⁿ` at interior node `k`.
    pub fn lambda_n(&self, k: usize) -> f64 {
        self.node_lambda_n[k]
    }

    #[inline]
    fn wrap(&self, j: isize) -> usize {
        j.rem_euclid(self.nt as isize) as usize
    }
}

/// One face flux and its derivatives with respect to the nodes it reads.
/// Nodes are `(i, j)` pairs; up to six per face.
#[derive(Clone, Copy, Debug, Default)]
struct FaceFlux {
    flux: f64,
    nodes: [(usize, usize); 6],
    dflux: [f64; 6],
}

fn coefficient(op: Operator, m: &FaceMetric, q: f64, dim: i32) -> (f64, f64) {
    let base = m.lambda.powi(dim - 2);
    match op {
        Operator::Harmonic => (base, 0.0),
        Operator::MinimalGraph => {
            let l2 = m.lambda * m.lambda;
            let w2 = 1.0 + q / l2;
            (base / w2.sqrt(), -0.5 * base / l2 / (w2 * w2.sqrt()))
        }
    }
}

/// Given `(u_s, u_θ)` at a face, returns the flux in direction `dir` (0 = s,
/// 1 = θ) and its partials with respect to `u_s` and `u_θ`.
fn flux_and_partials(op: Operator, m: &FaceMetric, us: f64, ut: f64, dir: usize, dim: i32) -> (f64, f64, f64) {
    let ps = m.alpha_s * us + m.beta * ut;
    let pt = m.beta * us + m.alpha_t * ut;
    let q = (ps * us + pt * ut) / m.jac;
    let (k, dk) = coefficient(op, m, q, dim);
    let (p, a_s, a_t) = if dir == 0 { (ps, m.alpha_s, m.beta) } else { (pt, m.beta, m.alpha_t) };
    let f = k * p;
    let dq_s = 2.0 * ps / m.jac;
    let dq_t = 2.0 * pt / m.jac;
    (f, k * a_s + dk * p * dq_s, k * a_t + dk * p * dq_t)
}

fn s_face_flux(geo: &FluxGeometry, op: Operator, u: &ScalarField, i: usize, j: usize) -> FaceFlux {
    let m = &geo.s_faces[i * geo.nt + j];
    let jp = geo.wrap(j as isize + 1);
    let jm = geo.wrap(j as isize - 1);
    let us = (u.get(i + 1, j) - u.get(i, j)) / geo.ds;
    let c = 1.0 / (4.0 * geo.dt);
    let ut = (u.get(i, jp) - u.get(i, jm) + u.get(i + 1, jp) - u.get(i + 1, jm)) * c;
    let (f, fs, ft) = flux_and_partials(op, m, us, ut, 0, geo.dim);
    FaceFlux {
        flux: f,
        nodes: [(i + 1, j), (i, j), (i, jp), (i, jm), (i + 1, jp), (i + 1, jm)],
        dflux: [fs / geo.ds, -fs / geo.ds, ft * c, -ft * c, ft * c, -ft * c],
    }
}

fn t_face_flux(geo: &FluxGeometry, op: Operator, u: &ScalarField, i: usize, j: usize) -> FaceFlux {
    let m = &geo.t_faces[(i - 1) * geo.nt + j];
    let jp = geo.wrap(j as isize + 1);
    let ut = (u.get(i, jp) - u.get(i, j)) / geo.dt;
    let c = 1.0 / (4.0 * geo.ds);
    let us = (u.get(i + 1, j) - u.get(i - 1, j) + u.get(i + 1, jp) - u.get(i - 1, jp)) * c;
    let (f, fs, ft) = flux_and_partials(op, m, us, ut, 1, geo.dim);
    FaceFlux {
        flux: f,
        nodes: [(i, jp), (i, j), (i + 1, j), (i - 1, j), (i + 1, jp), (i - 1, jp)],
        dflux: [ft / geo.dt, -ft / geo.dt, fs * c, -fs * c, fs * c, -fs * c],
    }
}

/// Discrete `∂_α(k ∂_α u)` at interior nodes, optionally minus a source, and
/// optionally the Jacobian with respect to interior values.
pub fn assemble(
    geo: &FluxGeometry,
    op: Operator,
    u: &ScalarField,
    source: Option<&[f64]>,
    with_jacobian: bool,
) -> (Vec<f64>, Option<StencilMatrix>) {
    let (ns, nt) = (geo.ns, geo.nt);
    let s_flux: Vec<FaceFlux> = (0..ns * nt).into_par_iter().map(|k| s_face_flux(geo, op, u, k / nt, k % nt)).collect();
    let t_flux: Vec<FaceFlux> =
        (0..(ns - 1) * nt).into_par_iter().map(|k| t_face_flux(geo, op, u, k / nt + 1, k % nt)).collect();
    let rows: Vec<(f64, [f64; 9])> = (0..(ns - 1) * nt)
        .into_par_iter()
        .map(|k| {
            let i = k / nt + 1;
            let j = k % nt;
            let jm = geo.wrap(j as isize - 1);
            let inv_j = 1.0 / geo.node_jac[k];
            let terms = [
                (&s_flux[i * nt + j], inv_j / geo.ds),
                (&s_flux[(i - 1) * nt + j], -inv_j / geo.ds),
                (&t_flux[k], inv_j / geo.dt),
                (&t_flux[(i - 1) * nt + jm], -inv_j / geo.dt),
            ];
            let mut r = terms.iter().map(|(f, w)| f.flux * w).sum::<f64>();
            if let Some(src) = source {
                r -= src[k];
            }
            let mut row = [0.0; 9];
            if with_jacobian {
                for (face, w) in terms {
                    for (&(ni, nj), &d) in face.nodes.iter().zip(&face.dflux) {
                        if ni == 0 || ni == ns {
                            continue;
                        }
                        let di = ni as isize - i as isize;
                        let mut dj = nj as isize - j as isize;
                        if dj > 1 {
                            dj -= nt as isize;
                        } else if dj < -1 {
                            dj += nt as isize;
                        }
                        row[((di + 1) * 3 + (dj + 1)) as usize] += w * d;
                    }
                }
            }
            (r, row)
        })
        .collect();
    let residual = rows.iter().map(|r| r.0).collect();
    let jacobian = with_jacobian.then(|| {
        let mut m = StencilMatrix::zeros(ns - 1, nt);
        for (k, (_, row)) in rows.into_iter().enumerate() {
            m.set_row(k, row);
        }
        m
    });
    (residual, jacobian)
}
