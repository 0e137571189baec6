//! Dirichlet solvers on a ring: harmonic, minimal graph and prescribed mean
//! curvature, plus the supersolution and τ-continuation.

mod assemble;
mod continuation;

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::linalg::{self, LinearSolverKind};
use crate::ring::AnnularGrid;
use crate::spaceform::CoordinateSampler;

pub use assemble::{FluxGeometry, Operator};
pub use continuation::{continuation_run, continuation_solve, ContinuationStep, ContinuationTrace};

pub const LINE_SEARCH_FACTOR: f64 = 0.5;
pub const MIN_LINE_SEARCH_STEP: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub newton_tol: f64,
    pub max_newton: usize,
    pub linear_tol: f64,
    pub linear_solver: LinearSolverKind,
    /// Starting height of the continuation.
    pub initial_tau: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton: 50,
            linear_tol: 1e-12,
            linear_solver: LinearSolverKind::Auto,
            initial_tau: 0.05,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.newton_tol) || !positive(self.linear_tol) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.max_newton < 1 {
            return Err(Error::InvalidArgument("max_newton must be at least 1".into()));
        }
        if !positive(self.initial_tau) || self.initial_tau > 1.0 {
            return Err(Error::InvalidArgument("initial_tau must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Wall-clock data, kept under one key so reports can be compared byte for
/// byte after removing it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_s: f64,
}

impl Timing {
    pub fn since(start: Instant) -> Self {
        Self { wall_time_s: start.elapsed().as_secs_f64() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub newton_iterations: usize,
    pub final_residual_max: f64,
    pub tau: f64,
    pub min_gradient_norm: f64,
    pub linear_solver: LinearSolverKind,
    pub linear_iterations: usize,
    /// Max residual after each accepted iterate, starting with the initial guess.
    pub residual_history: Vec<f64>,
    pub timestamp: Timing,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be finite and nonnegative, got {tau}")));
    }
    Ok(())
}

fn check_grid(grid: &AnnularGrid) -> Result<()> {
    if grid.chart().dim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "the grid solvers are two-dimensional; chart has dim {}",
            grid.chart().dim()
        )));
    }
    Ok(())
}

/// Smallest interior `|∇u|` from the finite-difference jets.
pub fn min_interior_gradient(u: &ScalarField) -> Result<f64> {
    Ok(u.interior_jets()?.iter().map(|j| j.grad_norm()).fold(f64::INFINITY, f64::min))
}

/// Discrete `∂_α(λ^{n−2} ∂_α u / W)` at interior nodes, row by row. Equals
/// `−λⁿ H` of the graph of `u`.
pub fn minimal_graph_residual(u: &ScalarField) -> Vec<f64> {
    let geo = FluxGeometry::new(u.grid());
    assemble::assemble(&geo, Operator::MinimalGraph, u, None, false).0
}

/// Discrete `∂_α(λ^{n−2} ∂_α u)` at interior nodes.
pub fn harmonic_residual(u: &ScalarField) -> Vec<f64> {
    let geo = FluxGeometry::new(u.grid());
    assemble::assemble(&geo, Operator::Harmonic, u, None, false).0
}

/// Laplace–Beltrami Dirichlet problem with `ω = 0` outside and `ω = τ` inside.
pub fn solve_harmonic(grid: &Arc<AnnularGrid>, tau: f64, opts: &SolveOptions) -> Result<ScalarField> {
    solve_harmonic_with_report(grid, tau, opts).map(|r| r.0)
}

pub fn solve_harmonic_with_report(
    grid: &Arc<AnnularGrid>,
    tau: f64,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport)> {
    check_tau(tau)?;
    check_grid(grid)?;
    opts.validate()?;
    let start = Instant::now();
    let geo = FluxGeometry::new(grid);
    let u0 = ScalarField::from_fn(grid.clone(), 0.0, tau, |_| 0.0)?;
    let (r, jac) = assemble::assemble(&geo, Operator::Harmonic, &u0, None, true);
    let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
    let sol = linalg::solve(&jac.expect("jacobian requested"), &rhs, opts.linear_solver, opts.linear_tol)?;
    let u = ScalarField::from_interior(grid.clone(), 0.0, tau, &sol.x)?;
    let (r1, _) = assemble::assemble(&geo, Operator::Harmonic, &u, None, false);
    let report = SolveReport {
        converged: true,
        newton_iterations: 1,
        final_residual_max: max_abs(&r1),
        tau,
        min_gradient_norm: min_interior_gradient(&u)?,
        linear_solver: sol.kind,
        linear_iterations: sol.iterations,
        residual_history: vec![max_abs(&r), max_abs(&r1)],
        timestamp: Timing::since(start),
    };
    Ok((u, report))
}

fn newton(
    grid: &Arc<AnnularGrid>,
    tau: f64,
    init: &ScalarField,
    source: Option<&[f64]>,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport)> {
    check_tau(tau)?;
    check_grid(grid)?;
    opts.validate()?;
    if !init.grid().same_layout(grid) {
        return Err(Error::GridMismatch("initial guess lives on a different grid".into()));
    }
    if init.boundary_values() != (0.0, tau) {
        return Err(Error::InvalidArgument(format!(
            "initial guess has boundary values {:?}, expected (0, {tau})",
            init.boundary_values()
        )));
    }
    let start = Instant::now();
    let geo = FluxGeometry::new(grid);
    let mut u = ScalarField::from_interior(grid.clone(), 0.0, tau, init.interior_values())?;
    let (mut r, mut jac) = assemble::assemble(&geo, Operator::MinimalGraph, &u, source, true);
    let mut rmax = max_abs(&r);
    let mut history = vec![rmax];
    let mut iterations = 0;
    let mut linear_iterations = 0;
    let mut kind = opts.linear_solver;
    let mut converged = rmax <= opts.newton_tol;
    while !converged && iterations < opts.max_newton {
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let sol = linalg::solve(jac.as_ref().expect("jacobian requested"), &rhs, opts.linear_solver, opts.linear_tol)?;
        kind = sol.kind;
        linear_iterations += sol.iterations;
        let mut step = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = u.interior_values().iter().zip(&sol.x).map(|(a, d)| a + step * d).collect();
            if trial.iter().all(|v| v.is_finite()) {
                let cand = ScalarField::from_interior(grid.clone(), 0.0, tau, &trial)?;
                let (rc, _) = assemble::assemble(&geo, Operator::MinimalGraph, &cand, source, false);
                let cmax = max_abs(&rc);
                if cmax < rmax {
                    break Some((cand, cmax));
                }
            }
            step *= LINE_SEARCH_FACTOR;
            if step < MIN_LINE_SEARCH_STEP {
                break None;
            }
        };
        iterations += 1;
        let Some((cand, cmax)) = accepted else {
            log::debug!("newton stagnated at tau {tau} after {iterations} iterations, residual {rmax:.3e}");
            break;
        };
        u = cand;
        rmax = cmax;
        history.push(rmax);
        converged = rmax <= opts.newton_tol;
        if !converged {
            let (rn, jn) = assemble::assemble(&geo, Operator::MinimalGraph, &u, source, true);
            r = rn;
            jac = jn;
        }
    }
    let report = SolveReport {
        converged,
        newton_iterations: iterations,
        final_residual_max: rmax,
        tau,
        min_gradient_norm: min_interior_gradient(&u)?,
        linear_solver: kind,
        linear_iterations,
        residual_history: history,
        timestamp: Timing::since(start),
    };
    Ok((u, report))
}

/// Damped Newton for the minimal graph equation. Stagnation is reported
/// through `converged = false`; linear breakdown is an error.
pub fn solve_minimal_graph(
    grid: &Arc<AnnularGrid>,
    tau: f64,
    init: &ScalarField,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport)> {
    newton(grid, tau, init, None, opts)
}

/// Graph of prescribed mean curvature `div(∇u/W) = H`, harmonic initial guess.
pub fn solve_prescribed_mean_curvature(
    grid: &Arc<AnnularGrid>,
    tau: f64,
    h: &dyn CoordinateSampler,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport)> {
    let geo = FluxGeometry::new(grid);
    let (ns, nt) = (grid.ns(), grid.ntheta());
    let source: Vec<f64> = (0..(ns - 1) * nt)
        .map(|k| {
            let p = grid.node(k / nt + 1, k % nt);
            geo.lambda_n(k) * h.sample(&p).value
        })
        .collect();
    let init = solve_harmonic(grid, tau, opts)?;
    newton(grid, tau, &init, Some(&source), opts)
}

/// `g(t) = −t²/(4τ) + 5t/4`.
pub fn supersolution_profile(t: f64, tau: f64) -> f64 {
    -t * t / (4.0 * tau) + 1.25 * t
}

/// `v = g(ω)` nodewise with boundary rows exactly `(0, τ)`.
pub fn build_supersolution(omega: &ScalarField, tau: f64) -> Result<ScalarField> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    if omega.boundary_values() != (0.0, tau) {
        return Err(Error::InvalidArgument(format!(
            "harmonic field has boundary values {:?}, expected (0, {tau})",
            omega.boundary_values()
        )));
    }
    let interior: Vec<f64> = omega.interior_values().iter().map(|&w| supersolution_profile(w, tau)).collect();
    ScalarField::from_interior(omega.grid_arc().clone(), 0.0, tau, &interior)
}
