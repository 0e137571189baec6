use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ring::{AnnularGrid, CurveSpec, GridSpec};
use crate::spaceform::ChartSpec;

/// Rings used throughout the test suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardRing {
    /// Flat, `R₁ = 1`, `R₀ = 2`.
    Circles,
    /// Flat, ellipse(3, 2) around ellipse(1.2, 0.8).
    Ellipses,
    /// Flat, circle of radius 2 around a shifted, rotated ellipse.
    OffsetEllipse,
    /// `ε = 1`, circles of radius 0.5 and 0.2.
    SphereCircles,
    /// `ε = 1`, small ellipses.
    SphereEllipses,
}

impl StandardRing {
    pub const ALL: [StandardRing; 5] = [
        StandardRing::Circles,
        StandardRing::Ellipses,
        StandardRing::OffsetEllipse,
        StandardRing::SphereCircles,
        StandardRing::SphereEllipses,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StandardRing::Circles => "circles",
            StandardRing::Ellipses => "ellipses",
            StandardRing::OffsetEllipse => "offset_ellipse",
            StandardRing::SphereCircles => "sphere_circles",
            StandardRing::SphereEllipses => "sphere_ellipses",
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            StandardRing::SphereCircles | StandardRing::SphereEllipses => 1.0,
            _ => 0.0,
        }
    }

    pub fn curves(&self) -> (CurveSpec, CurveSpec) {
        match self {
            StandardRing::Circles => (CurveSpec::circle([0.0, 0.0], 2.0), CurveSpec::circle([0.0, 0.0], 1.0)),
            StandardRing::Ellipses => (CurveSpec::ellipse([0.0, 0.0], 3.0, 2.0), CurveSpec::ellipse([0.0, 0.0], 1.2, 0.8)),
            StandardRing::OffsetEllipse => (
                CurveSpec::circle([0.0, 0.0], 2.0),
                CurveSpec::Ellipse { center: [0.3, 0.2], a: 0.9, b: 0.6, rotation: 0.5 },
            ),
            StandardRing::SphereCircles => (CurveSpec::circle([0.0, 0.0], 0.5), CurveSpec::circle([0.0, 0.0], 0.2)),
            StandardRing::SphereEllipses => (
                CurveSpec::ellipse([0.0, 0.0], 0.5, 0.4),
                CurveSpec::Ellipse { center: [0.03, 0.02], a: 0.2, b: 0.14, rotation: 0.3 },
            ),
        }
    }

    /// A height comfortably below the largest attainable one.
    pub fn default_tau(&self) -> f64 {
        match self {
            StandardRing::Circles | StandardRing::Ellipses => 1.0,
            StandardRing::OffsetEllipse => 0.5,
            StandardRing::SphereCircles => 0.15,
            StandardRing::SphereEllipses => 0.1,
        }
    }

    pub fn grid_spec(&self, ns: usize, ntheta: usize) -> GridSpec {
        let (outer, inner) = self.curves();
        GridSpec { chart: ChartSpec { epsilon: self.epsilon(), dim: 2 }, outer, inner, ns, ntheta }
    }

    pub fn grid(&self, ns: usize, ntheta: usize) -> Result<Arc<AnnularGrid>> {
        Ok(Arc::new(self.grid_spec(ns, ntheta).build(false)?))
    }
}
