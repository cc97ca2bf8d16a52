//! Solver toolkit for linkage problems: find x ∈ X and y ∈ X⊥ with
//! y ∈ S(x), for an operator S on R^n and a linear subspace X.
//!
//! The toolkit provides
//!
//! - subspaces with cached orthonormal bases and projectors ([`subspace`]),
//! - single-valued operators (affine, smooth gradients) with resolvents
//!   ([`operators`]),
//! - the partial inverse of an operator across a subspace and the graph
//!   transform behind it ([`partial_inverse`]),
//! - semimonotonicity certification, elicitation bounds, and stepsize
//!   planning for nonmonotone operators ([`certify`]),
//! - the relaxed progressive decoupling iteration with separate primal and
//!   dual relaxation, its preconditioned proximal-point form, and relaxed
//!   Douglas–Rachford splitting, all with shared trace recording
//!   ([`solvers`]),
//! - canonical example problems with known solutions and certificates
//!   ([`problems`]), and
//! - CSV/JSON input and output helpers ([`io`]).

pub mod certify;
pub mod error;
pub mod io;
mod linalg;
pub mod operators;
pub mod partial_inverse;
pub mod problems;
pub mod region;
pub mod solvers;
pub mod subspace;

pub use certify::{
    ElicitationReport, LocalityEstimate, SampledCheck, SemimonCertificate, StepsizePlan,
};
pub use error::{Error, Result};
pub use operators::{Operator, OperatorKind, ResolventResult, SmoothSpec};
pub use partial_inverse::GraphPoint;
pub use problems::LinkageProblem;
pub use region::Region;
pub use solvers::{
    IterateState, IterateTrace, PppaConfig, RunOptions, RunStatus, SolverConfig, TraceRow,
};
pub use subspace::Subspace;
