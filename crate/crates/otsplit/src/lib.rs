//! Numerical toolkit for optimal transport from a two-dimensional source to a
//! one-dimensional target.
//!
//! The library is organized around the stages of the 2D → 1D transport problem:
//!
//! - [`cost`] — cost functions on `X̄ × Ȳ` with derivatives, the c-exponential,
//!   and the Ma–Trudinger–Wang curvature evaluator.
//! - [`measure`] — quadrature representations of the planar marginal `μ` and
//!   the interval marginal `ν`.
//! - [`geometry`] — level-curve tracing, c-linearity / c-convexity diagnostics,
//!   P-set membership and the mass comparison property.
//! - [`quotient`] — the foliation quotient `Q`, reduced cost `b`, coarea
//!   pushforward density `h`, and the equal-dimensional 1D solver.
//! - [`splitting`] — the mass-splitting construction of the optimal map and
//!   continuity probing.
//! - [`oracle`] — an exact discrete Kantorovich solver (transportation simplex)
//!   used as ground truth.
//! - [`scenario`] — named end-to-end experiments wiring the modules together.

pub mod cost;
pub mod geometry;
pub mod measure;
pub mod oracle;
pub mod quotient;
pub mod scenario;
pub mod splitting;

pub use cost::{CostModel, Domain, DiagnosticReport, MtwQuery, Point2, Rect, Vec2};
pub use measure::{SourceMeasure, TargetMeasure};

/// Errors shared across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point ({0:?}, y={1}) is outside the domain closure")]
    OutOfDomain(Point2, f64),
    #[error("covector is not on the image curve D_x c(x, Y): residual {residual} > tolerance {tolerance}")]
    NotOnImage { residual: f64, tolerance: f64 },
    #[error("finite-difference stencil leaves the domain")]
    StencilOutsideDomain,
    #[error("no grid cell brackets the level value {0}")]
    EmptyCurve(f64),
    #[error("non-degeneracy (A2) fails at ({0:?}, y={1})")]
    DegeneratePoint(Point2, f64),
    #[error("cost is not c-linear: tangent defect {defect} exceeds tolerance {tolerance}")]
    NotCLinear { defect: f64, tolerance: f64 },
    #[error("mixed sign of the reduced cross-derivative; defer to the discrete oracle")]
    MixedSign,
    #[error("transportation simplex exceeded the pivot budget")]
    DegenerateStall,
    #[error("no point on the transverse segment attains Q = {0}")]
    OutOfRange(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
