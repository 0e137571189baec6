use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ring::{AnnularGrid, CurveSpec, GridSpec};
use crate::solve::SolveOptions;
use crate::spaceform::ChartSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    pub outer: CurveSpec,
    pub inner: CurveSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub ns: usize,
    pub ntheta: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub r_inner: f64,
    pub r_outer: f64,
    pub tau: f64,
    #[serde(default = "default_oracle_dim")]
    pub dim: usize,
    /// Rows in the dumped table.
    #[serde(default = "default_oracle_rows")]
    pub rows: usize,
}

fn default_oracle_dim() -> usize {
    2
}

fn default_oracle_rows() -> usize {
    101
}

/// Check selectors understood by `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    SolverVsOracle,
    OracleResidual,
    GradientMaxPrinciple,
    Supersolution,
    TauEstimates,
    TauEstimatesHarmonic,
    SmallTauRegime,
    ConvexityAndRank,
    GradientMonotonicity,
    HopfBoundaryBound,
    StructureExamples,
    SigmaRoutes,
    BoundaryConvexity,
    #[serde(rename = "radial_rank_3d")]
    RadialRank3d,
    /// Dented outer boundary; must fail.
    NegativeBoundary,
    /// Saddle inserted into the harmonic field; must fail.
    NegativeSaddle,
    /// Constant positive `H` on the sphere; must fail.
    NegativeStructure,
    /// The solution used as its own supersolution; must fail.
    NegativeSupersolution,
}

impl CheckName {
    pub const DEFAULT_SUITE: [CheckName; 10] = [
        CheckName::OracleResidual,
        CheckName::GradientMaxPrinciple,
        CheckName::Supersolution,
        CheckName::ConvexityAndRank,
        CheckName::GradientMonotonicity,
        CheckName::HopfBoundaryBound,
        CheckName::StructureExamples,
        CheckName::SigmaRoutes,
        CheckName::BoundaryConvexity,
        CheckName::RadialRank3d,
    ];

    pub const NEGATIVE_CONTROLS: [CheckName; 4] = [
        CheckName::NegativeBoundary,
        CheckName::NegativeSaddle,
        CheckName::NegativeStructure,
        CheckName::NegativeSupersolution,
    ];

    /// Whether the check needs the solved field.
    pub fn needs_solution(&self) -> bool {
        matches!(
            self,
            CheckName::GradientMaxPrinciple
                | CheckName::Supersolution
                | CheckName::ConvexityAndRank
                | CheckName::GradientMonotonicity
                | CheckName::HopfBoundaryBound
                | CheckName::NegativeSupersolution
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub small_taus: Vec<f64>,
    /// Heights for the τ-estimate bands; the schedule is used when empty.
    pub estimate_taus: Vec<f64>,
    pub sigma_samples: usize,
    pub seed: u64,
    /// Allowed deviation of the harmonic bands from 1.
    pub harmonic_tol: f64,
    /// Grids for the oracle comparison; defaults to the configured grid and
    /// two refinements.
    pub oracle_grids: Vec<[usize; 2]>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            small_taus: vec![0.01, 0.02, 0.04],
            estimate_taus: Vec::new(),
            sigma_samples: 1000,
            seed: 0,
            harmonic_tol: 1e-6,
            oracle_grids: Vec::new(),
        }
    }
}

/// One JSON run description shared by all commands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub chart: ChartSpec,
    pub ring: RingConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solve: SolveOptions,
    pub tau_schedule: Vec<f64>,
    #[serde(default)]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// `None` runs the default suite; an empty list runs nothing.
    #[serde(default)]
    pub checks: Option<Vec<CheckName>>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
}

/// Configuration problem with the 1-based line it refers to.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Line of the first occurrence of `"key"`, or 1.
fn line_of(text: &str, key: &str) -> usize {
    let quoted = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&quoted)).map_or(1, |k| k + 1)
}

impl RunConfig {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            chart: self.chart,
            outer: self.ring.outer.clone(),
            inner: self.ring.inner.clone(),
            ns: self.grid.ns,
            ntheta: self.grid.ntheta,
        }
    }

    pub fn final_tau(&self) -> f64 {
        self.tau_schedule.last().copied().unwrap_or(0.0)
    }

    pub fn output_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        cli_override
            .map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("ringlab_out"))
    }

    /// Parses and validates; the returned grid is the one every command uses.
    pub fn parse(text: &str, allow_negative_curvature: bool) -> Result<(RunConfig, AnnularGrid), ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| ConfigError { line: e.line().max(1), message: e.to_string() })?;
        let at = |key: &str, message: String| ConfigError { line: line_of(text, key), message };
        if cfg.chart.dim != 2 {
            return Err(at("dim", format!("the solver works in dimension 2, got {}", cfg.chart.dim)));
        }
        cfg.solve.validate().map_err(|e| at("solve", e.to_string()))?;
        if cfg.tau_schedule.is_empty() {
            return Err(at("tau_schedule", "tau_schedule must not be empty".into()));
        }
        if cfg.tau_schedule.iter().any(|t| !(t.is_finite() && *t > 0.0 && *t <= 1.0))
            || cfg.tau_schedule.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(at("tau_schedule", "tau_schedule must be strictly increasing within (0, 1]".into()));
        }
        let tau = cfg.final_tau();
        if let Some(c) = cfg.levels.iter().find(|c| !(c.is_finite() && **c > 0.0 && **c < tau)) {
            return Err(at("levels", format!("level {c} is outside (0, {tau})")));
        }
        if let Some(o) = &cfg.oracle {
            if !(o.dim == 2 || o.dim == 3) || o.rows < 2 {
                return Err(at("oracle", "oracle needs dim 2 or 3 and at least 2 rows".into()));
            }
        }
        let grid = cfg.grid_spec().build(allow_negative_curvature).map_err(|e| {
            let key = match e {
                crate::Error::GridDegeneracy { .. } | crate::Error::InvalidGrid(_) => "grid",
                crate::Error::InvalidChart(_) | crate::Error::ChartDomain { .. } => "chart",
                _ => "ring",
            };
            at(key, e.to_string())
        })?;
        Ok((cfg, grid))
    }
}
