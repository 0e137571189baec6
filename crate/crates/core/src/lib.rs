//! Minimal graphs over convex rings in space forms of nonnegative curvature.
//!
//! The crate solves `div(∇u/√(1+|∇u|²)) = 0` on `Ω₀ \ Ω̄₁` with `u = 0` on the
//! outer boundary and `u = τ` on the inner one, extracts the level sets of the
//! solution, and checks their convexity and the gradient estimates that go
//! with it.
//!
//! Module map:
//! - [`spaceform`]: conformal chart, Christoffel symbols, covariant jets.
//! - [`ring`]: boundary curves, convex rings, the transfinite grid.
//! - [`field`]: grid functions, finite-difference jets, snapshots.
//! - [`solve`]: harmonic and minimal-graph solvers, τ-continuation.
//! - [`levelgeom`]: second fundamental form, σ_k curvatures, level curves.
//! - [`verify`]: radial oracles and the property checks.
//! - [`cli`]: configuration, commands and report export.

pub mod cli;
pub mod error;
pub mod field;
pub mod io;
pub mod levelgeom;
pub mod linalg;
pub mod ring;
pub mod solve;
pub mod spaceform;
pub mod verify;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use ring::{build_grid, make_curve, AnnularGrid, ConvexCurve, ConvexRing, CurveSpec, GridSpec};
pub use spaceform::{PointJet, SpaceFormChart};
