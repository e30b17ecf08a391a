//! Error type shared by the whole crate.

use thiserror::Error;

use crate::solver::TraceEntry;

/// Errors raised by constructors, the region sampler and the solver.
///
/// Dimension agreement between two already-constructed points is a caller
/// contract and violations panic; everything that depends on user input
/// (coordinates, weights, matrices, regions, configuration) reports through
/// this enum instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point lies outside the open unit ball: |x| = {norm:.17}, limit {limit:.17}")]
    PointOutsideBall { norm: f64, limit: f64 },

    #[error("unsupported dimension {dim}: {reason}")]
    BadDimension { dim: usize, reason: &'static str },

    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("linear part is not an isometry: defect {defect:.3e} exceeds tolerance")]
    NotIsometry { defect: f64 },

    #[error("weights must be positive and finite, found {value}")]
    BadWeight { value: f64 },

    #[error("a measure needs at least one atom")]
    EmptyMeasure,

    #[error("measure has {points} points but {weights} weights")]
    WeightCount { points: usize, weights: usize },

    #[error("shape matrix must be symmetric positive definite")]
    BadShapeMatrix,

    #[error("region is not strictly interior to the unit ball: reaches norm {max_norm:.12}")]
    RegionNotInterior { max_norm: f64 },

    #[error("degenerate region: rejection efficiency {efficiency:.3e} below 1e-4")]
    DegenerateRegion { efficiency: f64 },

    #[error("antipodal pair: the closed form degenerates, the barycenter is 0")]
    AntipodalPair,

    #[error("invalid solver configuration: {0}")]
    BadConfig(&'static str),

    #[error(
        "solver did not converge: residual {residual_norm:.3e} after {iterations} iterations"
    )]
    NoConvergence {
        residual_norm: f64,
        iterations: usize,
        trace: Vec<TraceEntry>,
    },
}
