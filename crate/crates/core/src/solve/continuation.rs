use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{solve_harmonic, solve_minimal_graph, SolveOptions, SolveReport, Timing};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::levelgeom::{level_curvature, DEFAULT_GRAD_FLOOR};
use crate::ring::AnnularGrid;

/// Smallest step, relative to the first attempted one, before giving up.
pub const MIN_STEP_FRACTION: f64 = 1.0 / 1024.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationStep {
    pub tau: f64,
    /// Whether `tau` is one of the requested targets.
    pub target: bool,
    pub report: SolveReport,
    pub min_gradient_norm: f64,
    /// Smallest level-set curvature over interior nodes.
    pub min_level_curvature: f64,
    /// Smallest `|∇u|` on the outer boundary.
    pub min_outer_gradient: f64,
    /// Step halvings needed before this step was accepted.
    pub halvings: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ContinuationTrace {
    pub tau_schedule: Vec<f64>,
    pub steps: Vec<ContinuationStep>,
    /// Largest grid edge length, for tolerance scaling.
    pub h_max: f64,
    pub timestamp: Timing,
    /// Accepted solutions, parallel to `steps`.
    #[serde(skip)]
    pub solutions: Vec<ScalarField>,
}

impl ContinuationTrace {
    pub fn final_solution(&self) -> Option<&ScalarField> {
        self.solutions.last()
    }

    /// Solution at a requested target height.
    pub fn solution_at(&self, tau: f64) -> Option<&ScalarField> {
        self.steps.iter().position(|s| s.tau == tau).map(|k| &self.solutions[k])
    }

    pub fn last_good_tau(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.tau)
    }
}

fn step_diagnostics(u: &ScalarField) -> Result<(f64, f64, f64)> {
    let jets = u.interior_jets()?;
    let mut min_grad = f64::INFINITY;
    let mut min_kappa = f64::INFINITY;
    for jet in &jets {
        min_grad = min_grad.min(jet.grad_norm());
        match level_curvature(jet, DEFAULT_GRAD_FLOOR) {
            Ok(k) => min_kappa = min_kappa.min(k),
            Err(_) => min_kappa = f64::NEG_INFINITY,
        }
    }
    let (outer, _) = u.boundary_jets()?;
    let min_outer = outer.iter().map(|j| j.grad_norm()).fold(f64::INFINITY, f64::min);
    Ok((min_grad, min_kappa, min_outer))
}

fn predictor(prev: &ScalarField, prev_tau: f64, tau: f64) -> Result<ScalarField> {
    let ratio = tau / prev_tau;
    let interior: Vec<f64> = prev.interior_values().iter().map(|v| v * ratio).collect();
    ScalarField::from_interior(prev.grid_arc().clone(), 0.0, tau, &interior)
}

fn attempt(grid: &Arc<AnnularGrid>, tau: f64, init: &ScalarField, opts: &SolveOptions) -> Option<(ScalarField, SolveReport)> {
    match solve_minimal_graph(grid, tau, init, opts) {
        Ok((u, rep)) if rep.converged => Some((u, rep)),
        Ok((_, rep)) => {
            log::debug!("tau {tau}: newton stopped at residual {:.3e}", rep.final_residual_max);
            None
        }
        Err(e) => {
            log::debug!("tau {tau}: {e}");
            None
        }
    }
}

/// Runs the continuation as far as it gets. The error, if any, describes why
/// it stopped; the trace holds every accepted step.
pub fn continuation_run(
    grid: &Arc<AnnularGrid>,
    tau_targets: &[f64],
    opts: &SolveOptions,
) -> (ContinuationTrace, Option<Error>) {
    let start = Instant::now();
    let mut trace = ContinuationTrace { h_max: grid.h_max(), ..Default::default() };
    if let Err(e) = validate_targets(tau_targets).and_then(|_| opts.validate()) {
        return (trace, Some(e));
    }
    if tau_targets.is_empty() {
        return (trace, None);
    }
    let result = run(grid, tau_targets, opts, &mut trace);
    trace.timestamp = Timing::since(start);
    (trace, result.err())
}

fn validate_targets(targets: &[f64]) -> Result<()> {
    for (k, &t) in targets.iter().enumerate() {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidArgument(format!("tau target {t} is outside (0, 1]")));
        }
        if k > 0 && t <= targets[k - 1] {
            return Err(Error::InvalidArgument("tau targets must be strictly increasing".into()));
        }
    }
    Ok(())
}

fn accept(
    trace: &mut ContinuationTrace,
    u: ScalarField,
    report: SolveReport,
    target: bool,
    halvings: usize,
) -> Result<()> {
    let (min_gradient_norm, min_level_curvature, min_outer_gradient) = step_diagnostics(&u)?;
    trace.tau_schedule.push(report.tau);
    trace.steps.push(ContinuationStep {
        tau: report.tau,
        target,
        report,
        min_gradient_norm,
        min_level_curvature,
        min_outer_gradient,
        halvings,
    });
    trace.solutions.push(u);
    Ok(())
}

fn run(grid: &Arc<AnnularGrid>, targets: &[f64], opts: &SolveOptions, trace: &mut ContinuationTrace) -> Result<()> {
    // Start in the small-height regime from the harmonic initializer.
    let tau0 = opts.initial_tau.min(targets[0]);
    let mut start_tau = tau0;
    let mut halvings = 0;
    loop {
        let omega = solve_harmonic(grid, start_tau, opts)?;
        if let Some((u, rep)) = attempt(grid, start_tau, &omega, opts) {
            accept(trace, u, rep, start_tau == targets[0], halvings)?;
            break;
        }
        start_tau *= 0.5;
        halvings += 1;
        if start_tau < tau0 * MIN_STEP_FRACTION {
            return Err(Error::ContinuationFailure { last_good_tau: 0.0 });
        }
    }
    for &target in targets {
        let mut prev_tau = trace.last_good_tau();
        if target <= prev_tau {
            continue;
        }
        let first_step = target - prev_tau;
        let mut step = first_step;
        let mut halvings = 0;
        while prev_tau < target {
            let tau = if prev_tau + step >= target { target } else { prev_tau + step };
            let init = predictor(trace.solutions.last().expect("one accepted step"), prev_tau, tau)?;
            match attempt(grid, tau, &init, opts) {
                Some((u, rep)) => {
                    accept(trace, u, rep, tau == target, halvings)?;
                    prev_tau = tau;
                    halvings = 0;
                }
                None => {
                    step *= 0.5;
                    halvings += 1;
                    if step < first_step * MIN_STEP_FRACTION {
                        return Err(Error::ContinuationFailure { last_good_tau: prev_tau });
                    }
                }
            }
        }
    }
    Ok(())
}

/// τ-continuation through `tau_targets`; fails if a step underflows.
pub fn continuation_solve(grid: &Arc<AnnularGrid>, tau_targets: &[f64], opts: &SolveOptions) -> Result<ContinuationTrace> {
    match continuation_run(grid, tau_targets, opts) {
        (trace, None) => Ok(trace),
        (_, Some(e)) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{build_grid, ConvexRing, CurveSpec};
    use crate::spaceform::SpaceFormChart;

    fn circles() -> Arc<AnnularGrid> {
        let ring = ConvexRing::from_specs(
            CurveSpec::circle([0.0, 0.0], 2.0),
            CurveSpec::circle([0.0, 0.0], 1.0),
            SpaceFormChart::new(0.0, 2).unwrap(),
        )
        .unwrap();
        Arc::new(build_grid(ring, 16, 32).unwrap())
    }

    #[test]
    fn empty_targets_give_empty_trace() {
        let trace = continuation_solve(&circles(), &[], &SolveOptions::default()).unwrap();
        assert!(trace.steps.is_empty());
        assert!(trace.solutions.is_empty());
    }

    #[test]
    fn targets_are_reached_with_positive_gradient() {
        let trace = continuation_solve(&circles(), &[0.25, 0.5, 1.0], &SolveOptions::default()).unwrap();
        for t in [0.25, 0.5, 1.0] {
            assert!(trace.solution_at(t).is_some());
        }
        assert_eq!(trace.steps[0].tau, 0.05);
        assert!(trace.tau_schedule.windows(2).all(|w| w[1] > w[0]));
        for s in &trace.steps {
            assert!(s.report.converged);
            assert!(s.min_gradient_norm > 0.0);
            assert!(s.min_level_curvature > 0.0);
        }
    }

    #[test]
    fn invalid_targets_are_rejected() {
        assert!(continuation_solve(&circles(), &[0.5, 0.4], &SolveOptions::default()).is_err());
        assert!(continuation_solve(&circles(), &[1.5], &SolveOptions::default()).is_err());
    }

    #[test]
    fn starved_newton_fails_with_last_good_tau() {
        let opts = SolveOptions { max_newton: 1, newton_tol: 1e-15, ..Default::default() };
        let (trace, err) = continuation_run(&circles(), &[1.0], &opts);
        match err {
            Some(Error::ContinuationFailure { last_good_tau }) => {
                assert_eq!(last_good_tau, trace.last_good_tau());
                assert!(last_good_tau < 1.0);
                assert_eq!(trace.steps.len(), trace.solutions.len());
            }
            other => panic!("expected continuation failure, got {other:?}"),
        }
    }

    #[test]
    fn discrete_problem_beyond_catenoid_height_concentrates_in_inner_cell() {
        // The largest catenoid height on this ring is 0.2·arccosh(20) ≈ 0.74;
        // the discrete problem stays solvable and the surplus sits next to the
        // inner boundary.
        let ring = ConvexRing::from_specs(
            CurveSpec::circle([0.0, 0.0], 4.0),
            CurveSpec::circle([0.0, 0.0], 0.2),
            SpaceFormChart::new(0.0, 2).unwrap(),
        )
        .unwrap();
        let g = Arc::new(build_grid(ring, 16, 32).unwrap());
        let trace = continuation_solve(&g, &[1.0], &SolveOptions::default()).unwrap();
        let u = trace.final_solution().unwrap();
        let jump = 1.0 - u.get(g.ns() - 1, 0);
        assert!(jump > 0.26, "{jump}");
    }
}
