//! Command-line front end: `solve`, `levels`, `verify` and `oracle`.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 solver failure,
//! 3 verification failure.

mod config;
mod export;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde_json::json;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::io::{write_atomic, write_json};
use crate::levelgeom::{extract_level_with_jets, node_jets, LevelSetReport};
use crate::ring::{AnnularGrid, CurveSpec};
use crate::solve::{continuation_run, solve_harmonic, ContinuationTrace};
use crate::verify::{self, radial_oracle, interior_levels, VerificationReport};

pub use config::{CheckName, ConfigError, GridConfig, OracleConfig, RingConfig, RunConfig, VerifyConfig};
pub use export::{level_csv, levels_svg};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

pub const TRACE_FILE: &str = "trace.json";
pub const REPORT_FILE: &str = "verify_report.json";
pub const LEVELS_FILE: &str = "levels.json";
pub const SVG_FILE: &str = "levels.svg";

#[derive(Debug, Parser)]
#[command(name = "ringlab", version, about = "Minimal graphs over convex rings: solve, inspect, verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accept charts with negative curvature.
    #[arg(long)]
    pub experimental_negative_curvature: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continuation solve along the τ schedule; writes snapshots and the trace.
    Solve(Common),
    /// Extract level curves from a snapshot; writes CSV, JSON and SVG.
    Levels {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snapshot: PathBuf,
    },
    /// Run the configured checks; writes the JSON report.
    Verify(Common),
    /// Dump the radial exact solution as a table.
    Oracle(Common),
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Solve(c) => with_config(&c, |cfg, grid, out| cmd_solve(cfg, grid, out)),
        Command::Levels { common, snapshot } => {
            let allow = common.experimental_negative_curvature;
            with_config(&common, |cfg, _, out| cmd_levels(cfg, &snapshot, allow, out))
        }
        Command::Verify(c) => with_config(&c, |cfg, grid, out| cmd_verify(cfg, grid, out)),
        Command::Oracle(c) => with_config(&c, |cfg, _, out| cmd_oracle(cfg, out)),
    }
}

fn with_config(common: &Common, f: impl FnOnce(&RunConfig, Arc<AnnularGrid>, &Path) -> i32) -> i32 {
    let text = match fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", common.config.display());
            return EXIT_CONFIG;
        }
    };
    match RunConfig::parse(&text, common.experimental_negative_curvature) {
        Ok((cfg, grid)) => {
            let out = cfg.output_dir(common.out.as_deref());
            f(&cfg, Arc::new(grid), &out)
        }
        Err(e) => {
            eprintln!("error: {}: {e}", common.config.display());
            EXIT_CONFIG
        }
    }
}

fn io_failure(e: Error) -> i32 {
    eprintln!("error: {e}");
    EXIT_CONFIG
}

pub fn snapshot_name(step: usize, tau: f64) -> String {
    format!("field_{step:03}_tau_{tau:.6}.json")
}

/// Writes one snapshot per accepted step and the trace.
fn write_solve_outputs(trace: &ContinuationTrace, out: &Path) -> Result<()> {
    for (k, (step, u)) in trace.steps.iter().zip(&trace.solutions).enumerate() {
        u.write_snapshot(&out.join(snapshot_name(k, step.tau)))?;
    }
    write_json(&out.join(TRACE_FILE), trace)
}

pub fn cmd_solve(cfg: &RunConfig, grid: Arc<AnnularGrid>, out: &Path) -> i32 {
    let (trace, err) = continuation_run(&grid, &cfg.tau_schedule, &cfg.solve);
    if let Err(e) = write_solve_outputs(&trace, out) {
        return io_failure(e);
    }
    println!("{:>10} {:>6} {:>12} {:>12} {:>12}", "tau", "newton", "residual", "min |grad|", "min kappa");
    for s in &trace.steps {
        println!(
            "{:>10.6} {:>6} {:>12.3e} {:>12.4e} {:>12.4e}",
            s.tau, s.report.newton_iterations, s.report.final_residual_max, s.min_gradient_norm, s.min_level_curvature
        );
    }
    match err {
        None => EXIT_OK,
        Some(e) => {
            eprintln!("error: {e}");
            EXIT_SOLVER
        }
    }
}

fn level_list(cfg: &RunConfig, tau: f64) -> Vec<f64> {
    if cfg.levels.is_empty() {
        interior_levels(tau, 8)
    } else {
        cfg.levels.clone()
    }
}

pub fn cmd_levels(cfg: &RunConfig, snapshot: &Path, allow_negative: bool, out: &Path) -> i32 {
    if !snapshot.exists() {
        eprintln!("error: snapshot {} not found", snapshot.display());
        return EXIT_CONFIG;
    }
    let u = match ScalarField::read_snapshot(snapshot, allow_negative) {
        Ok(u) => u,
        Err(e) => {
            eprintln!("error: cannot read snapshot {}: {e}", snapshot.display());
            return EXIT_CONFIG;
        }
    };
    let (outer, inner) = u.boundary_values();
    let levels = level_list(cfg, inner.max(outer));
    let jets = match node_jets(&u) {
        Ok(j) => j,
        Err(e) => return io_failure(e),
    };
    let mut reports: Vec<LevelSetReport> = Vec::with_capacity(levels.len());
    for &c in &levels {
        match extract_level_with_jets(&u, &jets, c) {
            Ok(r) => reports.push(r),
            Err(e @ Error::LevelOutOfRange { .. }) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
            Err(e) => {
                eprintln!("error: level {c}: {e}");
                return EXIT_SOLVER;
            }
        }
    }
    let written = (|| -> Result<()> {
        for (k, r) in reports.iter().enumerate() {
            write_atomic(&out.join(format!("level_{k:02}.csv")), level_csv(r).as_bytes())?;
        }
        write_json(&out.join(LEVELS_FILE), &reports)?;
        write_atomic(&out.join(SVG_FILE), levels_svg(u.grid(), &reports).as_bytes())
    })();
    if let Err(e) = written {
        return io_failure(e);
    }
    println!("{:>12} {:>8} {:>14} {:>14}", "level", "points", "min kappa", "max kappa");
    for r in &reports {
        println!("{:>12.6} {:>8} {:>14.6e} {:>14.6e}", r.level, r.polyline.len() - 1, r.min_curvature, r.max_curvature);
    }
    EXIT_OK
}

/// Lazily computed inputs shared by several checks.
struct Context<'a> {
    cfg: &'a RunConfig,
    grid: Arc<AnnularGrid>,
    trace: Option<std::result::Result<ContinuationTrace, String>>,
    omega: Option<ScalarField>,
}

impl Context<'_> {
    fn trace(&mut self) -> Result<&ContinuationTrace> {
        if self.trace.is_none() {
            let (trace, err) = continuation_run(&self.grid, &self.cfg.tau_schedule, &self.cfg.solve);
            self.trace = Some(match err {
                None => Ok(trace),
                Some(e) => Err(e.to_string()),
            });
        }
        match self.trace.as_ref().expect("set above") {
            Ok(t) => Ok(t),
            Err(msg) => Err(Error::InvalidArgument(format!("solve failed: {msg}"))),
        }
    }

    fn solution(&mut self) -> Result<ScalarField> {
        Ok(self.trace()?.final_solution().cloned().expect("nonempty schedule"))
    }

    fn omega(&mut self) -> Result<ScalarField> {
        if self.omega.is_none() {
            self.omega = Some(solve_harmonic(&self.grid, self.cfg.final_tau(), &self.cfg.solve)?);
        }
        Ok(self.omega.clone().expect("set above"))
    }

    fn concentric(&self) -> Result<(f64, f64)> {
        self.grid
            .ring()
            .concentric_radii()
            .filter(|_| self.grid.chart().is_flat())
            .ok_or_else(|| Error::InvalidArgument("this check needs a flat ring of concentric circles".into()))
    }

    fn oracle_grids(&self) -> Vec<(usize, usize)> {
        if self.cfg.verify.oracle_grids.is_empty() {
            let GridConfig { ns, ntheta } = self.cfg.grid;
            vec![(ns, ntheta), (2 * ns, 2 * ntheta), (4 * ns, 4 * ntheta)]
        } else {
            self.cfg.verify.oracle_grids.iter().map(|g| (g[0], g[1])).collect()
        }
    }

    fn run(&mut self, check: CheckName) -> Result<VerificationReport> {
        let tau = self.cfg.final_tau();
        match check {
            CheckName::SolverVsOracle => {
                let (r1, r0) = self.concentric()?;
                verify::check_solver_vs_oracle(r1, r0, self.oracle_tau(), &self.oracle_grids(), &self.cfg.solve)
            }
            CheckName::OracleResidual => {
                let (r1, r0) = self.concentric()?;
                verify::check_oracle_residual(r1, r0, self.oracle_tau(), &self.oracle_grids())
            }
            CheckName::GradientMaxPrinciple => verify::check_gradient_max_principle(&self.solution()?),
            CheckName::Supersolution => verify::check_supersolution(&self.solution()?, &self.omega()?, tau),
            CheckName::TauEstimates => verify::check_tau_estimates(&self.grid, &self.estimate_taus(), &self.cfg.solve),
            CheckName::TauEstimatesHarmonic => verify::check_tau_estimates_harmonic(
                &self.grid,
                &self.estimate_taus(),
                &self.cfg.solve,
                self.cfg.verify.harmonic_tol,
            ),
            CheckName::SmallTauRegime => {
                verify::check_small_tau_regime(&self.grid, &self.cfg.verify.small_taus, &self.cfg.solve)
            }
            CheckName::ConvexityAndRank => {
                verify::check_convexity_and_rank(&self.solution()?, &level_list(self.cfg, tau))
            }
            CheckName::GradientMonotonicity => verify::check_gradient_monotonicity(&self.solution()?),
            CheckName::HopfBoundaryBound => Ok(verify::check_hopf_boundary_bound(self.trace()?)),
            CheckName::StructureExamples => verify::check_structure_examples(),
            CheckName::SigmaRoutes => verify::check_sigma_routes(self.cfg.verify.sigma_samples, self.cfg.verify.seed),
            CheckName::BoundaryConvexity => {
                Ok(verify::check_boundary_convexity(&self.cfg.ring.outer, &self.cfg.ring.inner))
            }
            CheckName::RadialRank3d => {
                let (r1, r0) = self.concentric().unwrap_or((1.0, 2.0));
                verify::check_radial_rank_3d(r1, r0, 0.3 * (r0 - r1))
            }
            CheckName::NegativeBoundary => {
                let inner = CurveSpec::circle([0.0, 0.0], 0.5);
                Ok(rename(verify::check_boundary_convexity(&verify::dented_curve(), &inner), check))
            }
            CheckName::NegativeSaddle => {
                let s = verify::saddle_field(&self.omega()?, 0.1 * tau)?;
                Ok(rename(verify::check_convexity_and_rank(&s, &interior_levels(tau, 8))?, check))
            }
            CheckName::NegativeStructure => Ok(rename(verify::check_structure_condition(0.7, 1.0)?, check)),
            CheckName::NegativeSupersolution => {
                let u = self.solution()?;
                verify::check_supersolution_candidate(&u, &u, &self.omega()?, tau, &check_name(check))
            }
        }
    }

    /// Height for the oracle comparisons: the `oracle` section if present.
    fn oracle_tau(&self) -> f64 {
        self.cfg.oracle.as_ref().map_or(self.cfg.final_tau(), |o| o.tau)
    }

    fn estimate_taus(&self) -> Vec<f64> {
        if self.cfg.verify.estimate_taus.is_empty() {
            self.cfg.tau_schedule.clone()
        } else {
            self.cfg.verify.estimate_taus.clone()
        }
    }
}

fn check_name(check: CheckName) -> String {
    serde_json::to_value(check).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn claim(check: CheckName) -> &'static str {
    use verify::claims::*;
    match check {
        CheckName::SolverVsOracle => SOLVER_VS_ORACLE,
        CheckName::OracleResidual => ORACLE_RESIDUAL,
        CheckName::GradientMaxPrinciple => GRADIENT_MAX_PRINCIPLE,
        CheckName::Supersolution | CheckName::NegativeSupersolution => SUPERSOLUTION,
        CheckName::TauEstimates | CheckName::TauEstimatesHarmonic => TAU_ESTIMATES,
        CheckName::SmallTauRegime => SMALL_TAU,
        CheckName::ConvexityAndRank | CheckName::NegativeSaddle => CONVEXITY_AND_RANK,
        CheckName::GradientMonotonicity => GRADIENT_MONOTONICITY,
        CheckName::HopfBoundaryBound => HOPF,
        CheckName::StructureExamples => STRUCTURE_EXAMPLES,
        CheckName::NegativeStructure => STRUCTURE,
        CheckName::SigmaRoutes => SIGMA_ROUTES,
        CheckName::BoundaryConvexity | CheckName::NegativeBoundary => BOUNDARY_CONVEXITY,
        CheckName::RadialRank3d => RADIAL_RANK,
    }
}

fn rename(mut r: VerificationReport, check: CheckName) -> VerificationReport {
    r.check = check_name(check);
    r
}

/// Runs the selected checks in order; errors become failed entries.
pub fn run_checks(cfg: &RunConfig, grid: Arc<AnnularGrid>) -> Vec<VerificationReport> {
    let checks = cfg.checks.clone().unwrap_or_else(|| CheckName::DEFAULT_SUITE.to_vec());
    let mut ctx = Context { cfg, grid, trace: None, omega: None };
    checks
        .into_iter()
        .map(|check| {
            info!("running {}", check_name(check));
            let name = check_name(check);
            ctx.run(check).unwrap_or_else(|e| VerificationReport::from_error(&name, claim(check), &e))
        })
        .collect()
}

pub fn cmd_verify(cfg: &RunConfig, grid: Arc<AnnularGrid>, out: &Path) -> i32 {
    if cfg.checks.as_ref().is_some_and(|c| c.is_empty()) {
        warn!("empty check list: nothing to verify");
    }
    let reports = run_checks(cfg, grid);
    if let Err(e) = write_json(&out.join(REPORT_FILE), &reports) {
        return io_failure(e);
    }
    for r in &reports {
        println!("{}", r.summary_line());
        if let Some(e) = &r.error {
            println!("      error: {e}");
        }
    }
    if reports.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

pub fn cmd_oracle(cfg: &RunConfig, out: &Path) -> i32 {
    let Some(o) = &cfg.oracle else {
        eprintln!("error: the config has no \"oracle\" section");
        return EXIT_CONFIG;
    };
    let oracle = match radial_oracle(o.r_inner, o.r_outer, o.tau, o.dim) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let table = oracle.table(o.rows);
    let mut csv = String::from("r,u,du,d2u\n");
    for row in &table {
        csv.push_str(&format!("{},{},{},{}\n", row[0], row[1], row[2], row[3]));
    }
    let written = write_atomic(&out.join("oracle.csv"), csv.as_bytes())
        .and_then(|_| write_json(&out.join("oracle.json"), &json!({"oracle": oracle, "table": table})));
    if let Err(e) = written {
        return io_failure(e);
    }
    println!("flux c = {:.12}, maximal height = {:.12}", oracle.flux, oracle.max_height);
    EXIT_OK
}
