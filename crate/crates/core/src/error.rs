//! Shared error type for all core modules.

/// Everything that can go wrong across subspaces, operators, certification
/// and the solvers. One enum keeps `Result` signatures uniform and lets the
/// CLI map any failure onto a single exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input vector or matrix has the wrong dimension.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// `Subspace::from_basis` received only (numerically) zero vectors.
    #[error("trivial subspace requires explicit constructor")]
    TrivialSubspace,

    /// The affine resolvent system `I + γ⁻¹M` is numerically singular.
    #[error(
        "singular resolvent: |det(I + 1/γ·M)| = {det:.3e} is below the scaled 1e-14 threshold"
    )]
    SingularResolvent { det: f64 },

    /// Damped Newton failed to push the resolvent residual below tolerance.
    #[error(
        "resolvent Newton iteration stalled: residual {residual:.3e} > tol {tol:.3e} \
         after {iterations} iterations"
    )]
    NewtonDivergence {
        residual: f64,
        tol: f64,
        iterations: usize,
    },

    /// Jacobian requested for an operator kind that cannot provide one.
    #[error("operator kind is not differentiable")]
    NotDifferentiable,

    /// An operation needed an affine operator but got a nonlinear one.
    #[error("operation requires an affine operator")]
    NotAffine,

    /// `P_X + P_X⊥·M` is singular, so the partial-inverse matrix does not exist.
    #[error(
        "partial inverse does not exist: |det(P_X + P_X⊥·M)| = {det:.3e} \
         is below the scaled 1e-14 threshold"
    )]
    NonInvertiblePartialInverse { det: f64 },

    /// A matrix that must be symmetric positive definite is not.
    #[error("matrix {which} is not symmetric positive definite")]
    NotSpd { which: &'static str },

    /// The preconditioner and relaxation matrix must commute.
    #[error("preconditioner and relaxation do not commute: deviation {deviation:.3e}")]
    NonCommuting { deviation: f64 },

    /// No stepsize window exists: the negative parts satisfy [μ]₋[ρ]₋ ≥ 1.
    #[error("empty stepsize plan: [mu]_-·[rho]_- = {product:.6} >= 1")]
    EmptyPlan { product: f64 },

    /// The elicitation hypothesis ⟨x, Ax⟩ ≥ μ‖x‖² + ρ‖P_X Ax‖² fails on X.
    #[error(
        "elicitation precondition fails on X: restricted test-matrix margin {margin:.3e} < -1e-10"
    )]
    PreconditionOnX { margin: f64 },

    /// A parameter violates the validity window of a classic preset.
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    /// Malformed CSV/config input.
    #[error("parse error: {0}")]
    Parse(String),

    /// File I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
