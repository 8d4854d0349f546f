//! Error type shared by all modules.
//!
//! Variants correspond to the detectable failure modes of the library:
//! construction-time validation (grids, fields, densities, probability
//! vectors), solver failures, metric restrictions, and runtime guards of
//! the time integrator.

use thiserror::Error;

/// Errors produced by construction, solvers, and the time integrator.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A grid constructor was given inconsistent sizes, lengths, or a
    /// conformal factor on an unsupported dimension.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A field's value array does not match the node count of its grid.
    #[error("field has {found} values but the grid has {expected} nodes")]
    ShapeMismatch { expected: usize, found: usize },

    /// A field value is NaN or infinite.
    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    /// The weight of a weighted elliptic operator must be strictly
    /// positive everywhere.
    #[error("weight must be strictly positive (min = {min:.6e})")]
    NonPositiveWeight { min: f64 },

    /// The conjugate-gradient elliptic solve exceeded its iteration
    /// budget without reaching the residual target.
    #[error(
        "elliptic solve stopped after {iters} iterations with residual \
         {residual:.3e} (target {target:.3e})"
    )]
    SolverDivergence {
        iters: usize,
        residual: f64,
        target: f64,
    },

    /// A function that must integrate to zero against the volume form
    /// does not.
    #[error("function must have zero mean: |∫f dvol| = {integral:.3e} exceeds {limit:.3e}")]
    NonZeroMean { integral: f64, limit: f64 },

    /// A vector field required to be a metric gradient carries a
    /// divergence-free component.
    #[error(
        "vector field is not a gradient: divergence-free remainder {deviation:.3e} \
         exceeds {limit:.3e}"
    )]
    NotGradientField { deviation: f64, limit: f64 },

    /// A simulation configuration is internally inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Two tangent objects that must share a base point do not.
    #[error("arguments are attached to different base points")]
    BaseMismatch,

    /// The operation is defined for flat metrics only and the grid
    /// carries a conformal factor.
    #[error("operation requires a flat metric but the grid has a conformal factor")]
    UnsupportedMetric,

    /// A density dipped below the strict-positivity floor.
    #[error("density fell below the positivity floor {floor:.1e} (min = {min:.6e})")]
    DensityFloor { min: f64, floor: f64 },

    /// A time step produced a non-finite field.
    #[error("step rejected at t = {time}: field became non-finite")]
    StepRejected { time: f64 },

    /// The quadrature domain does not cover enough standard deviations
    /// around the mean of a Gaussian state.
    #[error(
        "sample domain covers only {covered:.3} standard deviations around \
         the mean; at least {required} are required"
    )]
    DomainTooSmall { required: f64, covered: f64 },

    /// A rate vector that must sum to zero does not.
    #[error("rates must sum to zero: |Σ| = {sum:.3e} exceeds {limit:.3e}")]
    NonZeroSum { sum: f64, limit: f64 },
}
