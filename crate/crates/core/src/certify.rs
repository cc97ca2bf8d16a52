//! Semimonotonicity certification, elicitation bounds, stepsize planning,
//! spectral admissibility conditions, and locality radius computation:
//! everything needed to decide whether and how the solvers are guaranteed
//! to converge on a given linkage problem.
//!
//! An operator A is (μP_X⊥, ρP_X)-semimonotone when
//! ⟨x − x̄, y − ȳ⟩ ≥ μ‖P_X⊥(x − x̄)‖² + ρ‖P_X(y − ȳ)‖² over its graph.
//! For linear A this is equivalent to the positive semidefiniteness of
//! ½(A + Aᵀ) − μP_X⊥ − ρAᵀP_X A, which is what [`check_semimonotone_linear`]
//! tests. Negative μ and ρ quantify tolerated nonmonotonicity; the stepsize
//! planner turns a certificate into admissible (γ, λx, λy) ranges.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::Operator;
use crate::partial_inverse::GraphPoint;
use crate::region::Region;
use crate::solvers::SolverConfig;
use crate::subspace::Subspace;

/// Margin tolerance of the positive-semidefiniteness tests: exactly singular
/// test matrices (margin 0) must not be rejected by eigenvalue roundoff.
pub const PSD_TOL: f64 = 1e-10;

/// Slack tolerance of the sampled inequality checks.
pub const SAMPLE_TOL: f64 = 1e-8;

/// Default sample count for [`sampled_semimon_check`].
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Negative part [t]₋ = max(0, −t).
pub fn negative_part(t: f64) -> f64 {
    (-t).max(0.0)
}

/// Result of the linear semimonotonicity test.
#[derive(Debug, Clone)]
pub struct SemimonCertificate {
    pub mu: f64,
    pub rho: f64,
    pub subspace: Subspace,
    /// Smallest eigenvalue of the symmetric test matrix.
    pub margin: f64,
    /// margin ≥ −[`PSD_TOL`].
    pub feasible: bool,
}

/// Admissible stepsize ranges derived from a (μ, ρ) certificate:
/// γ ∈ ([μ]₋, 1/[ρ]₋), λx ∈ (0, 2(1+γρ)), λy ∈ (0, 2(1+μ/γ)).
#[derive(Debug, Clone, Copy)]
pub struct StepsizePlan {
    pub mu: f64,
    pub rho: f64,
}

impl StepsizePlan {
    /// Open interval of admissible proximal stepsizes; the upper end is
    /// `+∞` when ρ ≥ 0.
    pub fn gamma_interval(&self) -> (f64, f64) {
        let lo = negative_part(self.mu);
        let rho_neg = negative_part(self.rho);
        let hi = if rho_neg == 0.0 {
            f64::INFINITY
        } else {
            1.0 / rho_neg
        };
        (lo, hi)
    }

    /// True when γ lies strictly inside the admissible interval.
    pub fn contains_gamma(&self, gamma: f64) -> bool {
        let (lo, hi) = self.gamma_interval();
        gamma > lo && gamma < hi
    }

    /// Supremum of admissible primal relaxation factors: 2(1 + γρ).
    pub fn lambda_x_sup(&self, gamma: f64) -> f64 {
        2.0 * (1.0 + gamma * self.rho)
    }

    /// Supremum of admissible dual relaxation factors: 2(1 + μ/γ).
    pub fn lambda_y_sup(&self, gamma: f64) -> f64 {
        2.0 * (1.0 + self.mu / gamma)
    }

    /// Midpoint of the γ interval (geometric mean against 8·lo when the
    /// interval is unbounded); a reasonable default stepsize.
    pub fn suggested_gamma(&self) -> f64 {
        let (lo, hi) = self.gamma_interval();
        if hi.is_finite() {
            0.5 * (lo + hi)
        } else if lo > 0.0 {
            2.0 * lo
        } else {
            1.0
        }
    }

    /// A config at the suggested γ with relaxation factors at `fraction`
    /// of their suprema.
    pub fn suggested_config(&self, fraction: f64) -> SolverConfig {
        let gamma = self.suggested_gamma();
        SolverConfig::new(
            gamma,
            fraction * self.lambda_x_sup(gamma),
            fraction * self.lambda_y_sup(gamma),
        )
    }
}

/// Output of [`elicitation_bound`]: full-space semimonotonicity elicited
/// from an inequality that holds on X only.
#[derive(Debug, Clone)]
pub struct ElicitationReport {
    /// Ā = ½(A + Aᵀ) − ρAᵀP_X A.
    pub a_bar: DMatrix<f64>,
    /// Spectral norm of the X×X⊥ block of Ā (in orthonormal bases).
    pub beta: f64,
    /// Smallest Rayleigh quotient of Ā over X⊥.
    pub sigma: f64,
    /// Elicited coefficient μ_out = σ − β²/μ_in; A is
    /// (μ_out P_X⊥, ρP_X)-semimonotone.
    pub mu_out: f64,
}

/// Radius conversion of a local certificate: semimonotonicity on a
/// δ-neighbourhood yields convergence from starts within ε in the solver
/// metric.
#[derive(Debug, Clone, Copy)]
pub struct LocalityEstimate {
    pub delta: f64,
    pub epsilon: f64,
}

/// Result of a sampled semimonotonicity check.
#[derive(Debug, Clone)]
pub struct SampledCheck {
    /// worst_violation ≥ −[`SAMPLE_TOL`].
    pub holds: bool,
    /// Minimum slack of the inequality over all samples (negative values
    /// witness a violation).
    pub worst_violation: f64,
    /// The sampled point attaining the worst slack.
    pub worst_point: Option<DVector<f64>>,
}

/// Tests whether the linear operator given by `matrix` is
/// (μP_X⊥, ρP_X)-semimonotone: the test matrix
/// ½(A + Aᵀ) − μP_X⊥ − ρAᵀP_X A must be positive semidefinite.
pub fn check_semimonotone_linear(
    matrix: &DMatrix<f64>,
    s: &Subspace,
    mu: f64,
    rho: f64,
) -> Result<SemimonCertificate> {
    let n = s.dim_ambient();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "check_semimonotone_linear",
            expected: n,
            got: matrix.nrows(),
        });
    }
    let test = semimon_test_matrix(matrix, s, mu, rho);
    let margin = linalg::min_eigenvalue_symmetric(&test);
    Ok(SemimonCertificate {
        mu,
        rho,
        subspace: s.clone(),
        margin,
        feasible: margin >= -PSD_TOL,
    })
}

/// The symmetric test matrix ½(A + Aᵀ) − μP_X⊥ − ρAᵀP_X A.
pub fn semimon_test_matrix(matrix: &DMatrix<f64>, s: &Subspace, mu: f64, rho: f64) -> DMatrix<f64> {
    linalg::sym_part(matrix)
        - s.projector_complement() * mu
        - matrix.transpose() * s.projector() * matrix * rho
}

/// Elicits a full-space (μ_out P_X⊥, ρP_X) certificate from the restricted
/// inequality ⟨x, Ax⟩ ≥ μ_in‖x‖² + ρ‖P_X Ax‖² for all x ∈ X with μ_in > 0.
///
/// With Ā = ½(A+Aᵀ) − ρAᵀP_X A, β the norm of Ā's mixed X×X⊥ block and σ
/// the smallest Rayleigh quotient of Ā over X⊥, the elicited coefficient is
/// μ_out = σ − β²/μ_in.
pub fn elicitation_bound(
    matrix: &DMatrix<f64>,
    s: &Subspace,
    mu_in: f64,
    rho: f64,
) -> Result<ElicitationReport> {
    let n = s.dim_ambient();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "elicitation_bound",
            expected: n,
            got: matrix.nrows(),
        });
    }
    if mu_in <= 0.0 || !mu_in.is_finite() {
        return Err(Error::OutOfRange {
            what: "mu_in",
            detail: format!("elicitation requires a strictly positive mu on X, got {mu_in}"),
        });
    }
    if s.dim() == n {
        return Err(Error::OutOfRange {
            what: "subspace",
            detail: "elicitation requires a proper subspace (nontrivial complement)".into(),
        });
    }

    let a_bar = linalg::sym_part(matrix) - matrix.transpose() * s.projector() * matrix * rho;
    let bx = s.basis();
    let bp = s.basis_complement();

    // restricted precondition: λ_min(BᵀĀB − μ_in I) ≥ −tol on X
    let restricted = bx.transpose() * &a_bar * bx - DMatrix::identity(s.dim(), s.dim()) * mu_in;
    let precondition_margin = linalg::min_eigenvalue_symmetric(&restricted);
    if precondition_margin < -PSD_TOL {
        return Err(Error::PreconditionOnX {
            margin: precondition_margin,
        });
    }

    let beta = linalg::spectral_norm(&(bx.transpose() * &a_bar * bp));
    let sigma = linalg::min_eigenvalue_symmetric(&(bp.transpose() * &a_bar * bp));
    let mu_out = sigma - beta * beta / mu_in;
    Ok(ElicitationReport {
        a_bar,
        beta,
        sigma,
        mu_out,
    })
}

/// Builds the admissible stepsize ranges for a (μ, ρ) certificate. Fails
/// with `EmptyPlan` when [μ]₋[ρ]₋ ≥ 1 (the nonmonotonicity is too severe
/// for any guarantee).
pub fn stepsize_plan(mu: f64, rho: f64) -> Result<StepsizePlan> {
    let product = negative_part(mu) * negative_part(rho);
    if product >= 1.0 {
        return Err(Error::EmptyPlan { product });
    }
    Ok(StepsizePlan { mu, rho })
}

/// Config (γ, λx, λy) = (1, 1, 1); admissible when both μ > −½ and ρ > −½.
pub fn spingarn_preset(mu: f64, rho: f64) -> Result<SolverConfig> {
    if !(mu > -0.5 && rho > -0.5) {
        return Err(Error::OutOfRange {
            what: "spingarn",
            detail: format!("unit stepsizes require mu > -1/2 and rho > -1/2, got ({mu}, {rho})"),
        });
    }
    Ok(SolverConfig::new(1.0, 1.0, 1.0))
}

/// Classic single-relaxation decoupling: (γ, 1, 1 − [μ]₋/γ); admissible
/// when [μ]₋[ρ]₋ < ½ and γ ∈ ([μ]₋, 1/(2[ρ]₋)).
pub fn progdec_classic_preset(gamma: f64, mu: f64, rho: f64) -> Result<SolverConfig> {
    let product = negative_part(mu) * negative_part(rho);
    if product >= 0.5 {
        return Err(Error::OutOfRange {
            what: "progdec_classic",
            detail: format!("requires [mu]-[rho]- < 1/2, got {product}"),
        });
    }
    let lo = negative_part(mu);
    let rho_neg = negative_part(rho);
    let hi = if rho_neg == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (2.0 * rho_neg)
    };
    if !(gamma > lo && gamma < hi) {
        return Err(Error::OutOfRange {
            what: "gamma",
            detail: format!("classic decoupling requires gamma in ({lo}, {hi}), got {gamma}"),
        });
    }
    Ok(SolverConfig::new(
        gamma,
        1.0,
        1.0 - negative_part(mu) / gamma,
    ))
}

/// Relaxed Douglas–Rachford preset: (γ, λ, λ); admissible when
/// [μ]₋[ρ]₋ < 1, γ ∈ ([μ]₋, 1/[ρ]₋) and λ ∈ (0, 2(1 + min{γρ, μ/γ})).
pub fn relaxed_drs_preset(gamma: f64, lambda: f64, mu: f64, rho: f64) -> Result<SolverConfig> {
    let plan = stepsize_plan(mu, rho).map_err(|_| Error::OutOfRange {
        what: "relaxed_drs",
        detail: format!("requires [mu]-[rho]- < 1, got ({mu}, {rho})"),
    })?;
    if !plan.contains_gamma(gamma) {
        let (lo, hi) = plan.gamma_interval();
        return Err(Error::OutOfRange {
            what: "gamma",
            detail: format!("requires gamma in ({lo}, {hi}), got {gamma}"),
        });
    }
    let sup = 2.0 * (1.0 + (gamma * rho).min(mu / gamma));
    if !(lambda > 0.0 && lambda < sup) {
        return Err(Error::OutOfRange {
            what: "lambda",
            detail: format!("requires lambda in (0, {sup}), got {lambda}"),
        });
    }
    Ok(SolverConfig::new(gamma, lambda, lambda))
}

/// Spectral admissibility of a preconditioner/relaxation pair:
/// ᾱ = λ_min((I + M^{1/2}VM^{1/2})Λ⁻¹), admissible ⇔ ᾱ > ½. Computed via
/// the symmetric eigenproblem of Λ^{-1/2}(I + M^{1/2}VM^{1/2})Λ^{-1/2}.
pub fn pppa_condition(
    m: &DMatrix<f64>,
    lambda: &DMatrix<f64>,
    v: &DMatrix<f64>,
) -> Result<(bool, f64)> {
    let n = m.nrows();
    for (name, mat) in [("M", m), ("Lambda", lambda), ("V", v)] {
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "pppa_condition",
                expected: n,
                got: mat.nrows(),
            });
        }
        let _ = name;
    }
    linalg::check_spd("M", m)?;
    linalg::check_spd("Lambda", lambda)?;
    linalg::check_commuting(m, lambda)?;
    if !linalg::is_symmetric(v) {
        return Err(Error::NotSpd { which: "V" });
    }
    let sqrt_m = linalg::spd_sqrt(m)?;
    let inv_sqrt_lambda = linalg::spd_inv_sqrt(lambda)?;
    let core = DMatrix::identity(n, n) + &sqrt_m * v * &sqrt_m;
    let alpha_bar = linalg::min_eigenvalue_symmetric(&(&inv_sqrt_lambda * core * &inv_sqrt_lambda));
    Ok((alpha_bar > 0.5, alpha_bar))
}

/// Converts a certificate radius δ into a convergence basin radius ε in
/// the solver metric:
///
/// ```text
/// ε = δ √(min{γ/λx, 1/(γλy)}) · min{γ, 1/γ}
///     ───────────────────────────────────────────
///     √2 (1 − min{1/λx, 1/λy} + max{1/λx, 1/λy})
/// ```
pub fn locality_epsilon(
    delta: f64,
    gamma: f64,
    lambda_x: f64,
    lambda_y: f64,
) -> Result<LocalityEstimate> {
    for (name, value) in [
        ("delta", delta),
        ("gamma", gamma),
        ("lambda_x", lambda_x),
        ("lambda_y", lambda_y),
    ] {
        if value <= 0.0 || !value.is_finite() {
            return Err(Error::OutOfRange {
                what: name,
                detail: format!("locality inputs must be positive and finite, got {value}"),
            });
        }
    }
    let metric = (gamma / lambda_x).min(1.0 / (gamma * lambda_y)).sqrt();
    let shrink = gamma.min(1.0 / gamma);
    let inv_x = 1.0 / lambda_x;
    let inv_y = 1.0 / lambda_y;
    let denom = 2.0_f64.sqrt() * (1.0 - inv_x.min(inv_y) + inv_x.max(inv_y));
    Ok(LocalityEstimate {
        delta,
        epsilon: delta * metric * shrink / denom,
    })
}

/// Samples the anchored semimonotonicity inequality
/// ⟨x − x̄, S(x) − ȳ⟩ ≥ μ‖P_X⊥(x − x̄)‖² + ρ‖P_X(S(x) − ȳ)‖²
/// at pseudo-random points of `region` and reports the worst slack.
#[allow(clippy::too_many_arguments)]
pub fn sampled_semimon_check(
    op: &Operator,
    s: &Subspace,
    anchor: &GraphPoint,
    mu: f64,
    rho: f64,
    region: &Region,
    samples: usize,
    seed: u64,
) -> Result<SampledCheck> {
    if region.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            context: "sampled_semimon_check",
            expected: op.dim(),
            got: region.dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut worst_point = None;
    for _ in 0..samples {
        let x = region.sample(&mut rng);
        let y = op.eval(&x)?;
        let d = &x - &anchor.primal;
        let e = &y - &anchor.dual;
        let slack = d.dot(&e)
            - mu * s.project_complement(&d)?.norm_squared()
            - rho * s.project(&e)?.norm_squared();
        if slack < worst {
            worst = slack;
            worst_point = Some(x);
        }
    }
    Ok(SampledCheck {
        holds: worst >= -SAMPLE_TOL,
        worst_violation: worst,
        worst_point,
    })
}

/// Checks the pointwise Jacobian inequality
/// ⟨x, J(x̃)x⟩ ≥ μ‖x‖² + ρ‖P_X J(x̃)x‖² for all x ∈ X
/// at each supplied point x̃, as a PSD test of the X-restricted matrix
/// ½Bᵀ(J + Jᵀ)B − μI − ρ(JB)ᵀP_X(JB).
pub fn jacobian_condition_check(
    op: &Operator,
    s: &Subspace,
    mu: f64,
    rho: f64,
    points: &[DVector<f64>],
) -> Result<bool> {
    if mu <= 0.0 || mu.is_nan() {
        return Err(Error::OutOfRange {
            what: "mu",
            detail: format!("the Jacobian condition requires mu > 0, got {mu}"),
        });
    }
    if rho < 0.0 || rho.is_nan() {
        return Err(Error::OutOfRange {
            what: "rho",
            detail: format!("the Jacobian condition requires rho >= 0, got {rho}"),
        });
    }
    let b = s.basis();
    let d = s.dim();
    for point in points {
        let jac = op.jacobian(point)?;
        let jb = &jac * b;
        let test = (b.transpose() * &jb + jb.transpose() * b) * 0.5
            - DMatrix::identity(d, d) * mu
            - jb.transpose() * s.projector() * &jb * rho;
        if linalg::min_eigenvalue_symmetric(&test) < -PSD_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
