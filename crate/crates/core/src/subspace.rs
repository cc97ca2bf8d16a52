//! Closed linear subspaces X ⊆ R^n with exact orthogonal projections.
//!
//! A [`Subspace`] owns an orthonormal basis of X, the projector
//! P_X = B·Bᵀ, its complement P_X⊥ = I − P_X, and an orthonormal basis of
//! X⊥. Projectors are stored densely: problems are desk-scale and the
//! algebraic identities (idempotence, Pythagoras) matter more than memory.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Columns whose norm falls below this after orthogonalization against the
/// accepted basis are treated as dependent and dropped.
const DROP_TOL: f64 = 1e-10;

/// A closed linear subspace of R^n together with both orthogonal projectors.
#[derive(Debug, Clone)]
pub struct Subspace {
    /// Ambient dimension n.
    dim_ambient: usize,
    /// n×d matrix with orthonormal columns spanning X.
    basis: DMatrix<f64>,
    /// n×(n−d) matrix with orthonormal columns spanning X⊥.
    basis_complement: DMatrix<f64>,
    /// P_X = basis·basisᵀ.
    projector: DMatrix<f64>,
    /// P_X⊥ = I − P_X.
    projector_complement: DMatrix<f64>,
}

impl Subspace {
    /// Builds the subspace spanned by `vectors` (need not be independent).
    ///
    /// Orthonormalization is a deterministic modified Gram–Schmidt sweep with
    /// re-orthogonalization; columns that collapse below `1e-10` relative to
    /// their original norm are dropped, so rank-deficient input reduces to
    /// its independent span.
    ///
    /// A purely zero span is rejected: the trivial subspace {0} must be asked
    /// for explicitly via [`Subspace::trivial`].
    pub fn from_basis(vectors: &[DVector<f64>]) -> Result<Self> {
        let first = vectors.first().ok_or(Error::Parse(
            "from_basis requires at least one spanning vector".into(),
        ))?;
        let n = first.len();
        let mut accepted: Vec<DVector<f64>> = Vec::new();
        for v in vectors {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "from_basis spanning vectors",
                    expected: n,
                    got: v.len(),
                });
            }
            let scale = v.norm().max(1.0);
            let mut w = v.clone();
            // Two Gram–Schmidt passes keep the basis orthonormal to machine
            // precision even for nearly dependent input.
            for _ in 0..2 {
                for b in &accepted {
                    let c = b.dot(&w);
                    w.axpy(-c, b, 1.0);
                }
            }
            if w.norm() > DROP_TOL * scale {
                w.normalize_mut();
                accepted.push(w);
            }
        }
        if accepted.is_empty() {
            return Err(Error::TrivialSubspace);
        }
        Ok(Self::from_orthonormal_columns(n, accepted))
    }

    /// The trivial subspace {0} ⊂ R^n (P_X = 0). Must be constructed
    /// explicitly; `from_basis` rejects zero-only spans.
    pub fn trivial(n: usize) -> Self {
        Self::from_orthonormal_columns(n, Vec::new())
    }

    /// The full space R^n (P_X = I).
    pub fn full(n: usize) -> Self {
        let cols = (0..n)
            .map(|i| {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                e
            })
            .collect();
        Self::from_orthonormal_columns(n, cols)
    }

    /// The consensus subspace X = {(x₁,…,x_N) : x₁ = … = x_N} ⊂ R^{N·n}.
    ///
    /// Its projector is the N×N block-averaging matrix (1/N)·[I … I; …],
    /// i.e. every block of P_X v is the mean of the blocks of v.
    pub fn consensus(blocks: usize, block_dim: usize) -> Self {
        assert!(blocks >= 1 && block_dim >= 1, "consensus needs N, n >= 1");
        let n = blocks * block_dim;
        let scale = 1.0 / (blocks as f64).sqrt();
        let cols = (0..block_dim)
            .map(|j| {
                let mut v = DVector::zeros(n);
                for i in 0..blocks {
                    v[i * block_dim + j] = scale;
                }
                v
            })
            .collect();
        Self::from_orthonormal_columns(n, cols)
    }

    /// Assembles the struct from already-orthonormal columns and completes
    /// them to an orthonormal basis of R^n to obtain the complement basis.
    fn from_orthonormal_columns(n: usize, cols: Vec<DVector<f64>>) -> Self {
        let d = cols.len();
        let mut basis = DMatrix::zeros(n, d);
        for (j, c) in cols.iter().enumerate() {
            basis.set_column(j, c);
        }
        // Complete with coordinate vectors: sweep e_1..e_n against the
        // accepted basis, keeping what survives. This always yields n−d
        // further orthonormal columns.
        let mut all = cols;
        let mut complement: Vec<DVector<f64>> = Vec::new();
        for i in 0..n {
            if all.len() == n {
                break;
            }
            let mut w = DVector::zeros(n);
            w[i] = 1.0;
            for _ in 0..2 {
                for b in &all {
                    let c = b.dot(&w);
                    w.axpy(-c, b, 1.0);
                }
            }
            if w.norm() > DROP_TOL {
                w.normalize_mut();
                all.push(w.clone());
                complement.push(w);
            }
        }
        debug_assert_eq!(complement.len(), n - d);
        let mut basis_complement = DMatrix::zeros(n, n - d);
        for (j, c) in complement.iter().enumerate() {
            basis_complement.set_column(j, c);
        }
        let projector = &basis * basis.transpose();
        let projector_complement = DMatrix::identity(n, n) - &projector;
        Self {
            dim_ambient: n,
            basis,
            basis_complement,
            projector,
            projector_complement,
        }
    }

    /// Ambient dimension n.
    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    /// Dimension d of X.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormal basis of X (n×d).
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthonormal basis of X⊥ (n×(n−d)).
    pub fn basis_complement(&self) -> &DMatrix<f64> {
        &self.basis_complement
    }

    /// The projector P_X.
    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    /// The complement projector P_X⊥ = I − P_X.
    pub fn projector_complement(&self) -> &DMatrix<f64> {
        &self.projector_complement
    }

    fn check_dim(&self, v: &DVector<f64>, context: &'static str) -> Result<()> {
        if v.len() != self.dim_ambient {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.dim_ambient,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// P_X v.
    pub fn project(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(v, "project")?;
        Ok(&self.projector * v)
    }

    /// P_X⊥ v = v − P_X v.
    pub fn project_complement(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(v, "project_complement")?;
        Ok(&self.projector_complement * v)
    }

    /// Serializes the basis as CSV, one basis vector per row. The inverse of
    /// [`crate::io::read_subspace_csv`].
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.basis.ncols() {
            let row: Vec<String> = self
                .basis
                .column(j)
                .iter()
                .map(|x| format!("{x:.16e}"))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
