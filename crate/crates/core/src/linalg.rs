//! Small shared linear-algebra helpers: symmetric eigenvalue bounds, SPD
//! checks and square roots, spectral norms and radii.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative tolerance for symmetry / commutation checks.
const STRUCT_TOL: f64 = 1e-10;

/// ½(A + Aᵀ).
pub fn sym_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// True when ‖A − Aᵀ‖ is negligible relative to ‖A‖.
pub fn is_symmetric(a: &DMatrix<f64>) -> bool {
    (a - a.transpose()).norm() <= STRUCT_TOL * a.norm().max(1.0)
}

/// Smallest eigenvalue of the symmetric part of `a`.
pub fn min_eigenvalue_symmetric(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    sym_part(a)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Spectral radius max |λ_i| over the (possibly complex) eigenvalues.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .complex_eigenvalues()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

/// Verifies that `a` is symmetric positive definite.
pub fn check_spd(which: &'static str, a: &DMatrix<f64>) -> Result<()> {
    if !is_symmetric(a) || min_eigenvalue_symmetric(a) <= 0.0 {
        return Err(Error::NotSpd { which });
    }
    Ok(())
}

/// Verifies ‖MΛ − ΛM‖ is negligible.
pub fn check_commuting(m: &DMatrix<f64>, lambda: &DMatrix<f64>) -> Result<()> {
    let deviation = (m * lambda - lambda * m).norm();
    if deviation > STRUCT_TOL * (m.norm() * lambda.norm()).max(1.0) {
        return Err(Error::NonCommuting { deviation });
    }
    Ok(())
}

/// Symmetric square root of an SPD matrix via its eigendecomposition.
pub fn spd_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spd_power(a, 0.5)
}

/// Symmetric inverse square root of an SPD matrix.
pub fn spd_inv_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spd_power(a, -0.5)
}

fn spd_power(a: &DMatrix<f64>, p: f64) -> Result<DMatrix<f64>> {
    let eig = sym_part(a).symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotSpd { which: "spd_power" });
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.powf(p)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Smallest generalized eigenvalue of the pencil (C, B) restricted to
/// range(B), for symmetric C and symmetric positive semidefinite B:
/// min over v ∈ range(B) of vᵀCv / vᵀBv. Returns `None` when B ≈ 0.
pub fn restricted_pencil_min(c: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<f64> {
    let eig = sym_part(b).symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    if max_eig <= 0.0 {
        return None;
    }
    let tol = 1e-12 * max_eig;
    let kept: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > tol)
        .collect();
    if kept.is_empty() {
        return None;
    }
    // whitening map W with WᵀBW = I on the kept range
    let mut w = DMatrix::zeros(b.nrows(), kept.len());
    for (j, &i) in kept.iter().enumerate() {
        w.set_column(j, &(eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt()));
    }
    Some(min_eigenvalue_symmetric(&(w.transpose() * sym_part(c) * w)))
}
