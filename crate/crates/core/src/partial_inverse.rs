//! The Spingarn graph transform L_X and explicit partial inverses S^X of
//! affine operators.
//!
//! L_X(x, y) = (P_X x + P_X⊥ y, P_X y + P_X⊥ x) is an involution on pairs;
//! the partial inverse S^X is the operator whose graph is L_X(graph S). It
//! swaps the X⊥-components of primal and dual, which turns the linkage
//! problem "x ∈ X, y ∈ X⊥, y ∈ S(x)" into the root problem 0 ∈ S^X(x + y).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operators::{Operator, SINGULAR_TOL};
use crate::subspace::Subspace;

/// A point (x, y) of a graph, not necessarily with x ∈ X or y ∈ X⊥.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPoint {
    pub primal: DVector<f64>,
    pub dual: DVector<f64>,
}

impl GraphPoint {
    pub fn new(primal: DVector<f64>, dual: DVector<f64>) -> Self {
        Self { primal, dual }
    }
}

/// Applies L_X to a graph point: (x, y) ↦ (P_X x + P_X⊥ y, P_X y + P_X⊥ x).
pub fn spingarn_transform(s: &Subspace, p: &GraphPoint) -> Result<GraphPoint> {
    let primal = s.project(&p.primal)? + s.project_complement(&p.dual)?;
    let dual = s.project(&p.dual)? + s.project_complement(&p.primal)?;
    Ok(GraphPoint { primal, dual })
}

/// The matrix of the partial inverse of the linear map M with respect to X:
/// S^X = (P_X⊥ + P_X·M)·(P_X + P_X⊥·M)⁻¹.
///
/// Fails when P_X + P_X⊥·M is singular (graph S^X is then not the graph of a
/// linear map); the determinant threshold is scaled by the max-norm of that
/// matrix so detection does not depend on problem scale.
pub fn partial_inverse_matrix(m: &DMatrix<f64>, s: &Subspace) -> Result<DMatrix<f64>> {
    let n = s.dim_ambient();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "partial_inverse_matrix",
            expected: n,
            got: m.nrows().max(m.ncols()),
        });
    }
    let g = s.projector() + s.projector_complement() * m;
    let lu = g.clone().lu();
    let det = lu.determinant();
    let scale = g.iter().map(|x| x.abs()).fold(0.0f64, f64::max).max(1.0);
    if det.abs() < SINGULAR_TOL * scale {
        return Err(Error::NonInvertiblePartialInverse { det });
    }
    let k = s.projector_complement() + s.projector() * m;
    // S^X = K·G⁻¹, computed as the solution of G·(S^X)ᵀ... via LU on Gᵀ:
    // solve Xᵀ from Gᵀ Xᵀ = Kᵀ, i.e. X G = K.
    let xt = g
        .transpose()
        .lu()
        .solve(&k.transpose())
        .ok_or(Error::NonInvertiblePartialInverse { det })?;
    Ok(xt.transpose())
}

/// The partial inverse of an affine operator S(x) = Mx − m as an affine
/// operator on z-space: S^X(z) = A·z − a with A = (P_X⊥+P_X·M)(P_X+P_X⊥·M)⁻¹
/// and a = P_X·m − A·P_X⊥·m.
///
/// Zeros of S^X split into linkage solutions: if S^X(z*) = 0 then
/// (P_X z*, P_X⊥ z*) solves the linkage problem.
pub fn partial_inverse_affine(op: &Operator, s: &Subspace) -> Result<Operator> {
    let (m, shift) = op.as_affine().ok_or(Error::NotAffine)?;
    let a = partial_inverse_matrix(&m, s)?;
    let a_shift = s.project(&shift)? - &a * s.project_complement(&shift)?;
    Operator::affine(a, a_shift)
}

/// Aggregated infeasibility of a candidate pair for the linkage problem:
/// ‖P_X⊥ x‖ + ‖P_X y‖ + ‖y − S(x)‖. Zero exactly on link_X S.
pub fn linkage_residual(op: &Operator, s: &Subspace, p: &GraphPoint) -> Result<f64> {
    let off_x = s.project_complement(&p.primal)?.norm();
    let off_y = s.project(&p.dual)?.norm();
    let graph = (&p.dual - op.eval(&p.primal)?).norm();
    Ok(off_x + off_y + graph)
}
