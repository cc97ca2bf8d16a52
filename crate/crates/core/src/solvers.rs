//! Relaxed progressive decoupling, its preconditioned proximal-point form,
//! relaxed Douglas–Rachford splitting, trace recording, and linear-rate
//! utilities.
//!
//! The decoupling iteration for an operator S and subspace X with stepsize
//! γ > 0 and relaxation factors λx, λy:
//!
//! ```text
//! q   = J_{γ⁻¹S}(x + γ⁻¹y)
//! x̄   = P_X q                 ȳ = y − γ P_X⊥ q
//! x⁺  = x + λx (x̄ − x)        y⁺ = y + λy (ȳ − y)
//! ```
//!
//! The same update in the condensed variable z = x + y is a relaxed proximal
//! point step on the partial inverse with preconditioner
//! M = γ P_X + γ⁻¹ P_X⊥ and relaxation matrix Λ = λx P_X + λy P_X⊥.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{Operator, SINGULAR_TOL};
use crate::partial_inverse;
use crate::region::Region;
use crate::subspace::Subspace;

/// Iterates whose size (Lyapunov value when a solution is known, Euclidean
/// norm otherwise) exceeds this threshold mark the run as `Diverged`.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Default iteration cap for the driver loops.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Default residual tolerance; loops stop once res ≤ tol².
pub const DEFAULT_TOL: f64 = 1e-9;

/// Parameters of the decoupling iteration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Proximal stepsize γ > 0.
    pub gamma: f64,
    /// Relaxation factor for the primal update (λx ≥ 0; λx > 0 to make progress).
    pub lambda_x: f64,
    /// Relaxation factor for the dual update (λy ≥ 0; λy > 0 to make progress).
    pub lambda_y: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Residual tolerance: the run converges once res ≤ tol². `0.0` disables
    /// early termination and runs to the cap.
    pub tol: f64,
    /// Record α and halfspace gaps per iteration when the oblique weights
    /// are supplied through [`RunOptions`].
    pub record_diagnostics: bool,
}

impl SolverConfig {
    /// Config with the given stepsizes and default termination settings.
    pub fn new(gamma: f64, lambda_x: f64, lambda_y: f64) -> Self {
        SolverConfig {
            gamma,
            lambda_x,
            lambda_y,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            record_diagnostics: true,
        }
    }

    /// Replaces the termination settings.
    pub fn with_termination(mut self, max_iter: usize, tol: f64) -> Self {
        self.max_iter = max_iter;
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.gamma <= 0.0 || !self.gamma.is_finite() {
            return Err(Error::OutOfRange {
                what: "gamma",
                detail: format!("stepsize must be positive and finite, got {}", self.gamma),
            });
        }
        for (name, l) in [("lambda_x", self.lambda_x), ("lambda_y", self.lambda_y)] {
            if l <= 0.0 || !l.is_finite() {
                return Err(Error::OutOfRange {
                    what: name,
                    detail: format!("relaxation factor must be positive and finite, got {l}"),
                });
            }
        }
        if self.tol < 0.0 || !self.tol.is_finite() {
            return Err(Error::OutOfRange {
                what: "tol",
                detail: format!("tolerance must be nonnegative, got {}", self.tol),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::OutOfRange {
                what: "max_iter",
                detail: "iteration cap must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Primal/dual pair carried between iterations (x ∈ X, y ∈ X⊥).
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

/// Result of one decoupling step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Relaxed update (x⁺, y⁺).
    pub state: IterateState,
    /// Resolvent point q.
    pub q: DVector<f64>,
    /// Projected candidate x̄ = P_X q.
    pub xbar: DVector<f64>,
    /// Dual candidate ȳ = y − γ P_X⊥ q.
    pub ybar: DVector<f64>,
    /// Weighted residual γλx‖x̄−x‖² + γ⁻¹λy‖ȳ−y‖².
    pub res: f64,
    /// Inner iterations spent in the resolvent (0 for closed forms).
    pub resolvent_iterations: usize,
}

/// Terminal classification of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// Residual dropped to tol² or below.
    Converged,
    /// Iteration cap reached without meeting the tolerance.
    MaxIter,
    /// Iterates blew past [`DIVERGENCE_THRESHOLD`] or became non-finite.
    Diverged,
    /// The iteration could not proceed (bad config, resolvent failure, …).
    Error,
}

impl RunStatus {
    /// Process exit code convention: 0/2/3/1.
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Converged => 0,
            RunStatus::MaxIter => 2,
            RunStatus::Diverged => 3,
            RunStatus::Error => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "Converged",
            RunStatus::MaxIter => "MaxIter",
            RunStatus::Diverged => "Diverged",
            RunStatus::Error => "Error",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recorded iteration: the state the step started from plus the step's
/// candidates and scalar diagnostics.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub k: usize,
    pub res: f64,
    /// Weighted squared distance to the known solution, when available.
    pub lyapunov: Option<f64>,
    /// Measured halfspace ratio α, when oblique weights are supplied.
    pub alpha: Option<f64>,
    /// Halfspace gap evaluated at the known solution, when both are available.
    pub gap: Option<f64>,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub xbar: DVector<f64>,
    pub ybar: DVector<f64>,
}

/// Full record of a run.
#[derive(Debug, Clone)]
pub struct IterateTrace {
    pub rows: Vec<TraceRow>,
    pub status: RunStatus,
    /// Present when `status == Error`.
    pub error: Option<String>,
    /// Set when some resolvent point q left the monitored region.
    pub left_region: bool,
    /// Admissibility bound ᾱ for the configured stepsizes, when the oblique
    /// weights were supplied.
    pub alpha_bar: Option<f64>,
    /// State after the last applied update.
    pub final_x: DVector<f64>,
    pub final_y: DVector<f64>,
}

impl IterateTrace {
    fn failed(err: &Error, x: DVector<f64>, y: DVector<f64>) -> Self {
        IterateTrace {
            rows: Vec::new(),
            status: RunStatus::Error,
            error: Some(err.to_string()),
            left_region: false,
            alpha_bar: None,
            final_x: x,
            final_y: y,
        }
    }

    /// Number of recorded iterations.
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    /// Residual of the last recorded row.
    pub fn final_res(&self) -> Option<f64> {
        self.rows.last().map(|r| r.res)
    }
}

/// Optional context for a run: a known solution enables the Lyapunov column
/// and halfspace gaps, oblique weights (μ, ρ) enable α/ᾱ, and a region
/// flags iterates that leave the certified neighbourhood.
#[derive(Default, Clone, Copy)]
pub struct RunOptions<'a> {
    pub known_solution: Option<(&'a DVector<f64>, &'a DVector<f64>)>,
    /// (μ, ρ) weights of the oblique halfspace diagnostics.
    pub oblique: Option<(f64, f64)>,
    pub region: Option<&'a Region>,
}

/// Admissibility bound ᾱ = min((1+γρ)/λx, (1+μ/γ)/λy) for the structured
/// preconditioner/relaxation pair; the descent inequality requires ᾱ > ½.
pub fn structured_alpha_bar(gamma: f64, lambda_x: f64, lambda_y: f64, mu: f64, rho: f64) -> f64 {
    let ax = (1.0 + gamma * rho) / lambda_x;
    let ay = (1.0 + mu / gamma) / lambda_y;
    ax.min(ay)
}

/// Per-step halfspace diagnostics in the condensed variable z = x + y:
/// the measured ratio α, the run-level bound ᾱ, and the gap functional
/// r ↦ ⟨M(z−z̄), z̄−r⟩ − ⟨M(z−z̄), V·M(z−z̄)⟩ whose nonnegativity at a
/// solution certifies the descent inequality.
#[derive(Debug, Clone)]
pub struct HalfspaceDiagnostics {
    /// ‖z−z̄‖²_{M+MVM} / ‖z−z̄‖²_{MΛ}; `None` when the step made no move.
    pub alpha: Option<f64>,
    /// Spectral bound ᾱ; admissible stepsizes have ᾱ > ½.
    pub alpha_bar: f64,
    mz_diff: DVector<f64>,
    v_mz_diff: DVector<f64>,
    zbar: DVector<f64>,
}

impl HalfspaceDiagnostics {
    /// The configured stepsizes satisfy the descent condition ᾱ > ½.
    pub fn admissible(&self) -> bool {
        self.alpha_bar > 0.5
    }

    /// Gap ⟨M(z−z̄), z̄−r⟩ − ⟨M(z−z̄), V·M(z−z̄)⟩; nonnegative for r in the
    /// solution set when the (μ, ρ) certificate holds.
    pub fn gap(&self, r: &DVector<f64>) -> f64 {
        self.mz_diff.dot(&(&self.zbar - r)) - self.mz_diff.dot(&self.v_mz_diff)
    }
}

/// Builds the halfspace diagnostics of one structured step from the primal
/// and dual displacements.
#[allow(clippy::too_many_arguments)]
pub fn step_diagnostics(
    gamma: f64,
    lambda_x: f64,
    lambda_y: f64,
    mu: f64,
    rho: f64,
    x: &DVector<f64>,
    y: &DVector<f64>,
    xbar: &DVector<f64>,
    ybar: &DVector<f64>,
) -> HalfspaceDiagnostics {
    let dx = x - xbar; // lives in X
    let dy = y - ybar; // lives in X⊥
    let res = gamma * lambda_x * dx.norm_squared() + lambda_y / gamma * dy.norm_squared();
    let numerator = gamma * (1.0 + gamma * rho) * dx.norm_squared()
        + (1.0 + mu / gamma) / gamma * dy.norm_squared();
    let alpha = if res > 0.0 {
        Some(numerator / res)
    } else {
        None
    };
    HalfspaceDiagnostics {
        alpha,
        alpha_bar: structured_alpha_bar(gamma, lambda_x, lambda_y, mu, rho),
        mz_diff: &dx * gamma + &dy / gamma,
        v_mz_diff: &dx * (rho * gamma) + &dy * (mu / gamma),
        zbar: xbar + ybar,
    }
}

/// One decoupling step from `state`.
pub fn progdec_step(
    op: &Operator,
    s: &Subspace,
    cfg: &SolverConfig,
    state: &IterateState,
) -> Result<StepOutcome> {
    let v = &state.x + &state.y / cfg.gamma;
    let resolvent = op.resolvent(cfg.gamma, &v, None, None)?;
    let q = resolvent.point;
    let xbar = s.project(&q)?;
    let q_perp = &q - &xbar;
    let ybar = &state.y - &q_perp * cfg.gamma;
    let dx = &xbar - &state.x;
    let dy = &ybar - &state.y;
    let res =
        cfg.gamma * cfg.lambda_x * dx.norm_squared() + cfg.lambda_y / cfg.gamma * dy.norm_squared();
    let state = IterateState {
        x: &state.x + &dx * cfg.lambda_x,
        y: &state.y + &dy * cfg.lambda_y,
    };
    Ok(StepOutcome {
        state,
        q,
        xbar,
        ybar,
        res,
        resolvent_iterations: resolvent.iterations,
    })
}

/// Runs the decoupling iteration from (x0, y0). Starting points are
/// projected onto X and X⊥ first (with a warning if they move noticeably),
/// so the linkage structure is preserved exactly along the run.
pub fn run_progdec(
    op: &Operator,
    s: &Subspace,
    cfg: &SolverConfig,
    x0: DVector<f64>,
    y0: DVector<f64>,
    opts: &RunOptions<'_>,
) -> IterateTrace {
    if let Err(e) = cfg.validate() {
        return IterateTrace::failed(&e, x0, y0);
    }
    let x_init = match s.project(&x0) {
        Ok(p) => p,
        Err(e) => return IterateTrace::failed(&e, x0, y0),
    };
    let y_init = match s.project_complement(&y0) {
        Ok(p) => p,
        Err(e) => return IterateTrace::failed(&e, x0, y0),
    };
    if (&x_init - &x0).norm() > 1e-9 {
        log::warn!(
            "initial x moved {:.3e} under projection onto the subspace",
            (&x_init - &x0).norm()
        );
    }
    if (&y_init - &y0).norm() > 1e-9 {
        log::warn!(
            "initial y moved {:.3e} under projection onto the complement",
            (&y_init - &y0).norm()
        );
    }

    let mut state = IterateState {
        x: x_init,
        y: y_init,
    };
    let mut rows = Vec::new();
    let mut status = RunStatus::MaxIter;
    let mut error = None;
    let mut left_region = false;
    let alpha_bar = opts
        .oblique
        .map(|(mu, rho)| structured_alpha_bar(cfg.gamma, cfg.lambda_x, cfg.lambda_y, mu, rho));

    for k in 0..cfg.max_iter {
        let outcome = match progdec_step(op, s, cfg, &state) {
            Ok(o) => o,
            Err(e) => {
                status = RunStatus::Error;
                error = Some(e.to_string());
                break;
            }
        };
        let lyapunov = lyapunov_value(cfg, opts.known_solution, &state.x, &state.y);
        let (alpha, gap) = if cfg.record_diagnostics {
            match opts.oblique {
                Some((mu, rho)) => {
                    let diag = step_diagnostics(
                        cfg.gamma,
                        cfg.lambda_x,
                        cfg.lambda_y,
                        mu,
                        rho,
                        &state.x,
                        &state.y,
                        &outcome.xbar,
                        &outcome.ybar,
                    );
                    let gap = opts.known_solution.map(|(xs, ys)| diag.gap(&(xs + ys)));
                    (diag.alpha, gap)
                }
                None => (None, None),
            }
        } else {
            (None, None)
        };
        rows.push(TraceRow {
            k,
            res: outcome.res,
            lyapunov,
            alpha,
            gap,
            x: state.x.clone(),
            y: state.y.clone(),
            xbar: outcome.xbar.clone(),
            ybar: outcome.ybar.clone(),
        });
        if let Some(region) = opts.region {
            if !left_region && !region.contains(&outcome.q) {
                log::warn!("resolvent point left the certified region at iteration {k}");
                left_region = true;
            }
        }
        let res = outcome.res;
        state = outcome.state;
        if !res.is_finite() {
            status = RunStatus::Diverged;
            break;
        }
        if res <= cfg.tol * cfg.tol {
            status = RunStatus::Converged;
            break;
        }
        let size = lyapunov_value(cfg, opts.known_solution, &state.x, &state.y)
            .unwrap_or_else(|| (state.x.norm_squared() + state.y.norm_squared()).sqrt());
        if !size.is_finite() || size > DIVERGENCE_THRESHOLD {
            status = RunStatus::Diverged;
            break;
        }
    }

    IterateTrace {
        rows,
        status,
        error,
        left_region,
        alpha_bar,
        final_x: state.x,
        final_y: state.y,
    }
}

fn lyapunov_value(
    cfg: &SolverConfig,
    solution: Option<(&DVector<f64>, &DVector<f64>)>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Option<f64> {
    let (xs, ys) = solution?;
    let value = cfg.gamma / cfg.lambda_x * (x - xs).norm_squared()
        + 1.0 / (cfg.gamma * cfg.lambda_y) * (y - ys).norm_squared();
    value.is_finite().then_some(value)
}

/// Parameters of the preconditioned proximal point iteration
/// z⁺ = z + Λ(z̄ − z), M z̄ ∈ (M + T)(z̄).
#[derive(Debug, Clone)]
pub struct PppaConfig {
    /// Preconditioner M (symmetric positive definite).
    pub m: DMatrix<f64>,
    /// Relaxation matrix Λ (symmetric positive definite, commuting with M).
    pub lambda: DMatrix<f64>,
    /// Obliqueness matrix V (symmetric) for the halfspace diagnostics;
    /// omitted means V = 0.
    pub v: Option<DMatrix<f64>>,
    pub max_iter: usize,
    pub tol: f64,
}

impl PppaConfig {
    /// The structured instance M = γP_X + γ⁻¹P_X⊥, Λ = λxP_X + λyP_X⊥,
    /// V = ρP_X + μP_X⊥ matching a decoupling config on the subspace.
    pub fn structured(s: &Subspace, cfg: &SolverConfig, oblique: Option<(f64, f64)>) -> Self {
        let p = s.projector();
        let p_perp = s.projector_complement();
        PppaConfig {
            m: p * cfg.gamma + p_perp / cfg.gamma,
            lambda: p * cfg.lambda_x + p_perp * cfg.lambda_y,
            v: oblique.map(|(mu, rho)| p * rho + p_perp * mu),
            max_iter: cfg.max_iter,
            tol: cfg.tol,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        for (name, mat) in [("M", &self.m), ("Lambda", &self.lambda)] {
            if mat.nrows() != dim || mat.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "PppaConfig",
                    expected: dim,
                    got: mat.nrows(),
                });
            }
            let _ = name;
        }
        linalg::check_spd("M", &self.m)?;
        linalg::check_spd("Lambda", &self.lambda)?;
        linalg::check_commuting(&self.m, &self.lambda)?;
        if let Some(v) = &self.v {
            if v.nrows() != dim || v.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "PppaConfig::v",
                    expected: dim,
                    got: v.nrows(),
                });
            }
            if !linalg::is_symmetric(v) {
                return Err(Error::NotSpd { which: "V" });
            }
        }
        if self.tol < 0.0 || !self.tol.is_finite() {
            return Err(Error::OutOfRange {
                what: "tol",
                detail: format!("tolerance must be nonnegative, got {}", self.tol),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::OutOfRange {
                what: "max_iter",
                detail: "iteration cap must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// One proximal point step z ↦ (z⁺, z̄) for an affine operator T.
pub fn pppa_step(
    t: &Operator,
    cfg: &PppaConfig,
    z: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    cfg.validate(z.len())?;
    let (a, shift) = t.as_affine().ok_or(Error::NotAffine)?;
    let zbar = solve_resolvent_system(&cfg.m, &a, &shift, z)?;
    let zplus = z + &cfg.lambda * (&zbar - z);
    Ok((zplus, zbar))
}

fn solve_resolvent_system(
    m: &DMatrix<f64>,
    a: &DMatrix<f64>,
    shift: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<DVector<f64>> {
    let g = m + a;
    let scale = g.amax().max(1.0);
    let lu = g.lu();
    let det = lu.determinant();
    if det.abs() < SINGULAR_TOL * scale {
        return Err(Error::SingularResolvent { det });
    }
    lu.solve(&(m * z + shift))
        .ok_or(Error::SingularResolvent { det })
}

/// Runs the preconditioned proximal point iteration on an affine operator T
/// from z0. Nonlinear operators are rejected with `NotAffine`; run those
/// through [`run_progdec`] in the decoupling coordinates instead.
pub fn run_pppa(
    t: &Operator,
    cfg: &PppaConfig,
    z0: DVector<f64>,
    known_solution: Option<&DVector<f64>>,
) -> IterateTrace {
    let n = z0.len();
    let zero = DVector::zeros(n);
    if let Err(e) = cfg.validate(n) {
        return IterateTrace::failed(&e, z0, zero);
    }
    let (a, shift) = match t.as_affine() {
        Some(parts) => parts,
        None => return IterateTrace::failed(&Error::NotAffine, z0, zero),
    };
    let g = &cfg.m + &a;
    let scale = g.amax().max(1.0);
    let lu = g.lu();
    let det = lu.determinant();
    if det.abs() < SINGULAR_TOL * scale {
        return IterateTrace::failed(&Error::SingularResolvent { det }, z0, zero);
    }

    let v = cfg.v.clone().unwrap_or_else(|| DMatrix::zeros(n, n));
    let m_lambda = &cfg.m * &cfg.lambda;
    let lambda_inv = cfg
        .lambda
        .clone()
        .try_inverse()
        .expect("validated SPD matrix is invertible");
    let m_lambda_inv = &cfg.m * &lambda_inv;
    let alpha_numerator = &cfg.m + &cfg.m * &v * &cfg.m;
    let alpha_bar = match (linalg::spd_sqrt(&cfg.m), linalg::spd_inv_sqrt(&cfg.lambda)) {
        (Ok(sm), Ok(sli)) => {
            let core = DMatrix::identity(n, n) + &sm * &v * &sm;
            Some(linalg::min_eigenvalue_symmetric(&(&sli * core * &sli)))
        }
        _ => None,
    };

    let mut z = z0;
    let mut rows = Vec::new();
    let mut status = RunStatus::MaxIter;

    for k in 0..cfg.max_iter {
        let zbar = match lu.solve(&(&cfg.m * &z + &shift)) {
            Some(s) => s,
            None => {
                status = RunStatus::Error;
                break;
            }
        };
        let d = &z - &zbar;
        let res = d.dot(&(&m_lambda * &d));
        let lyapunov = known_solution.map(|zs| {
            let e = &z - zs;
            e.dot(&(&m_lambda_inv * &e))
        });
        let alpha = (res > 0.0).then(|| d.dot(&(&alpha_numerator * &d)) / res);
        let gap = known_solution.map(|zs| {
            let md = &cfg.m * &d;
            md.dot(&(&zbar - zs)) - md.dot(&(&v * &md))
        });
        rows.push(TraceRow {
            k,
            res,
            lyapunov,
            alpha,
            gap,
            x: z.clone(),
            y: zero.clone(),
            xbar: zbar.clone(),
            ybar: zero.clone(),
        });
        let update = &cfg.lambda * (&zbar - &z);
        z += update;
        if !res.is_finite() {
            status = RunStatus::Diverged;
            break;
        }
        if res <= cfg.tol * cfg.tol {
            status = RunStatus::Converged;
            break;
        }
        let size = match known_solution {
            Some(zs) => {
                let e = &z - zs;
                e.dot(&(&m_lambda_inv * &e))
            }
            None => z.norm(),
        };
        if !size.is_finite() || size > DIVERGENCE_THRESHOLD {
            status = RunStatus::Diverged;
            break;
        }
    }

    IterateTrace {
        rows,
        status,
        error: None,
        left_region: false,
        alpha_bar,
        final_x: z,
        final_y: zero,
    }
}

/// Runs relaxed Douglas–Rachford splitting in the shadow variable s:
///
/// ```text
/// x = P_X s,   q = J_{γ⁻¹S}(2x − s),   s⁺ = s + λ(q − x)
/// ```
///
/// Trace rows report the decoupling coordinates x = P_X s, y = γ(x − s);
/// these reproduce the λx = λy = λ decoupling run started from
/// x0 = P_X s0, y0 = γ(P_X s0 − s0).
#[allow(clippy::too_many_arguments)]
pub fn run_drs(
    op: &Operator,
    s: &Subspace,
    gamma: f64,
    lambda: f64,
    s0: DVector<f64>,
    max_iter: usize,
    tol: f64,
    opts: &RunOptions<'_>,
) -> IterateTrace {
    let cfg = SolverConfig::new(gamma, lambda, lambda).with_termination(max_iter, tol);
    let zero = DVector::zeros(s0.len());
    if let Err(e) = cfg.validate() {
        return IterateTrace::failed(&e, s0, zero);
    }

    let mut shadow = s0;
    let mut rows = Vec::new();
    let mut status = RunStatus::MaxIter;
    let mut error = None;
    let mut left_region = false;
    let alpha_bar = opts
        .oblique
        .map(|(mu, rho)| structured_alpha_bar(gamma, lambda, lambda, mu, rho));

    let map_state = |shadow: &DVector<f64>, s: &Subspace| -> Result<(DVector<f64>, DVector<f64>)> {
        let x = s.project(shadow)?;
        let y = (&x - shadow) * gamma;
        Ok((x, y))
    };

    let mut current = match map_state(&shadow, s) {
        Ok(pair) => pair,
        Err(e) => return IterateTrace::failed(&e, shadow, zero),
    };

    for k in 0..max_iter {
        let (x, y) = current;
        let v = &x * 2.0 - &shadow;
        let resolvent = match op.resolvent(gamma, &v, None, None) {
            Ok(r) => r,
            Err(e) => {
                status = RunStatus::Error;
                error = Some(e.to_string());
                current = (x, y);
                break;
            }
        };
        let q = resolvent.point;
        let xbar = match s.project(&q) {
            Ok(p) => p,
            Err(e) => {
                status = RunStatus::Error;
                error = Some(e.to_string());
                current = (x, y);
                break;
            }
        };
        let ybar = &y - (&q - &xbar) * gamma;
        let res = gamma * lambda * (&xbar - &x).norm_squared()
            + lambda / gamma * (&ybar - &y).norm_squared();
        let lyapunov = lyapunov_value(&cfg, opts.known_solution, &x, &y);
        let (alpha, gap) = match opts.oblique {
            Some((mu, rho)) if cfg.record_diagnostics => {
                let diag = step_diagnostics(gamma, lambda, lambda, mu, rho, &x, &y, &xbar, &ybar);
                let gap = opts.known_solution.map(|(xs, ys)| diag.gap(&(xs + ys)));
                (diag.alpha, gap)
            }
            _ => (None, None),
        };
        rows.push(TraceRow {
            k,
            res,
            lyapunov,
            alpha,
            gap,
            x: x.clone(),
            y: y.clone(),
            xbar,
            ybar,
        });
        if let Some(region) = opts.region {
            if !left_region && !region.contains(&q) {
                log::warn!("resolvent point left the certified region at iteration {k}");
                left_region = true;
            }
        }
        shadow += (&q - &x) * lambda;
        current = match map_state(&shadow, s) {
            Ok(pair) => pair,
            Err(e) => {
                status = RunStatus::Error;
                error = Some(e.to_string());
                current = (x, y);
                break;
            }
        };
        if !res.is_finite() {
            status = RunStatus::Diverged;
            break;
        }
        if res <= tol * tol {
            status = RunStatus::Converged;
            break;
        }
        if !shadow.norm().is_finite() || shadow.norm() > DIVERGENCE_THRESHOLD {
            status = RunStatus::Diverged;
            break;
        }
    }

    let (final_x, final_y) = current;
    IterateTrace {
        rows,
        status,
        error,
        left_region,
        alpha_bar,
        final_x,
        final_y,
    }
}

/// Spectral radius of the linear update map of the decoupling iteration on
/// an affine operator: H = I + Λ((M + T)⁻¹M − I) with T the partial inverse
/// of the operator's linear part. Radius < 1 means linear convergence,
/// radius > 1 means divergence from generic starts.
pub fn spectral_radius_linear(op: &Operator, s: &Subspace, cfg: &SolverConfig) -> Result<f64> {
    let (matrix, _) = op.as_affine().ok_or(Error::NotAffine)?;
    let t = partial_inverse::partial_inverse_matrix(&matrix, s)?;
    let n = matrix.nrows();
    let p = s.projector();
    let p_perp = s.projector_complement();
    let m = p * cfg.gamma + p_perp / cfg.gamma;
    let lambda = p * cfg.lambda_x + p_perp * cfg.lambda_y;
    let g = &m + &t;
    let scale = g.amax().max(1.0);
    let lu = g.lu();
    let det = lu.determinant();
    if det.abs() < SINGULAR_TOL * scale {
        return Err(Error::SingularResolvent { det });
    }
    let f = lu.solve(&m).ok_or(Error::SingularResolvent { det })?;
    let h = DMatrix::identity(n, n) + lambda * (f - DMatrix::identity(n, n));
    Ok(linalg::spectral_radius(&h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 2×2 operator (1/a)[[1+a², 1], [1, 1]] whose partial inverse across
    /// the first coordinate axis is [[a, 1], [−1, a]]; the origin is the
    /// unique linked solution.
    fn tightness_fixture(a: f64) -> (Operator, Subspace) {
        let m = DMatrix::from_row_slice(2, 2, &[(1.0 + a * a) / a, 1.0 / a, 1.0 / a, 1.0 / a]);
        let op = Operator::affine(m, DVector::zeros(2)).unwrap();
        let s = Subspace::from_basis(&[DVector::from_vec(vec![1.0, 0.0])]).unwrap();
        (op, s)
    }

    /// Block system: two uncoupled 2×2 linear maps under a consensus
    /// subspace; solution x* = (1,1,1,1), y* = (1,−3,−1,3).
    fn block_fixture() -> (Operator, Subspace, DVector<f64>, DVector<f64>) {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                -1.0, 2.0, 0.0, 0.0, //
                -2.0, -1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 0.0, 0.0,
            ],
        );
        let shift = DVector::from_vec(vec![0.0, 0.0, 2.0, -3.0]);
        let op = Operator::affine(m, shift).unwrap();
        let s = Subspace::consensus(2, 2);
        let xs = DVector::from_vec(vec![1.0, 1.0, 1.0, 1.0]);
        let ys = DVector::from_vec(vec![1.0, -3.0, -1.0, 3.0]);
        (op, s, xs, ys)
    }

    fn block_config() -> SolverConfig {
        SolverConfig::new(10.0 / 9.0, 4.0 / 5.0, 9.0 / 50.0).with_termination(20_000, 1e-9)
    }

    #[test]
    fn step_matches_hand_computed_values() {
        // q solves (I + S)q = (1,1) with S = [[2,1],[1,1]]: q = (0.2, 0.4);
        // then x̄ = (0.2, 0), ȳ = (0,1) − (0,0.4) = (0, 0.6), and with unit
        // relaxation the new state is (x̄, ȳ). Residual 0.64 + 0.16 = 0.8.
        let (op, s) = tightness_fixture(1.0);
        let cfg = SolverConfig::new(1.0, 1.0, 1.0);
        let state = IterateState {
            x: DVector::from_vec(vec![1.0, 0.0]),
            y: DVector::from_vec(vec![0.0, 1.0]),
        };
        let out = progdec_step(&op, &s, &cfg, &state).unwrap();
        assert_relative_eq!(out.q[0], 0.2, epsilon = 1e-14);
        assert_relative_eq!(out.q[1], 0.4, epsilon = 1e-14);
        assert_relative_eq!(out.xbar[0], 0.2, epsilon = 1e-14);
        assert_relative_eq!(out.xbar[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(out.ybar[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(out.ybar[1], 0.6, epsilon = 1e-14);
        assert_relative_eq!(out.res, 0.8, epsilon = 1e-14);
        assert_relative_eq!(out.state.x[0], 0.2, epsilon = 1e-14);
        assert_relative_eq!(out.state.y[1], 0.6, epsilon = 1e-14);
        assert_eq!(out.resolvent_iterations, 0);

        // with μ = ρ = 1/2: α = 1.5·0.8/0.8 = 1.5 = ᾱ, and the gap at the
        // solution (origin) is 0.4 − 0.4 = 0.
        let diag = step_diagnostics(
            1.0, 1.0, 1.0, 0.5, 0.5, &state.x, &state.y, &out.xbar, &out.ybar,
        );
        assert_relative_eq!(diag.alpha.unwrap(), 1.5, epsilon = 1e-12);
        assert_relative_eq!(diag.alpha_bar, 1.5, epsilon = 1e-12);
        assert!(diag.admissible());
        assert_relative_eq!(diag.gap(&DVector::zeros(2)), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_relaxation_keeps_state() {
        let (op, s) = tightness_fixture(1.0);
        let cfg = SolverConfig::new(1.0, 0.0, 0.0);
        let state = IterateState {
            x: DVector::from_vec(vec![1.0, 0.0]),
            y: DVector::from_vec(vec![0.0, 1.0]),
        };
        let out = progdec_step(&op, &s, &cfg, &state).unwrap();
        assert_eq!(out.state.x, state.x);
        assert_eq!(out.state.y, state.y);
        assert_eq!(out.res, 0.0);
    }

    #[test]
    fn solution_is_fixed_point() {
        let (op, s, xs, ys) = block_fixture();
        let cfg = block_config();
        let trace = run_progdec(
            &op,
            &s,
            &cfg,
            xs.clone(),
            ys.clone(),
            &RunOptions::default(),
        );
        assert_eq!(trace.status, RunStatus::Converged);
        assert_eq!(trace.iterations(), 1);
        assert!(trace.final_res().unwrap() <= 1e-20);
        assert!((&trace.final_x - &xs).norm() <= 1e-9);
        assert!((&trace.final_y - &ys).norm() <= 1e-9);
    }

    #[test]
    fn block_run_matches_reference_trajectory() {
        let (op, s, xs, ys) = block_fixture();
        let cfg = block_config();
        let opts = RunOptions {
            known_solution: Some((&xs, &ys)),
            oblique: Some((-1.0, -0.5)),
            region: None,
        };
        let x0 = DVector::from_vec(vec![-2.0, -2.0, -2.0, -2.0]);
        let y0 = DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0]);
        let trace = run_progdec(&op, &s, &cfg, x0, y0, &opts);
        assert_eq!(trace.status, RunStatus::Converged);
        // Independent reference run converges exactly at row k = 113.
        assert_eq!(trace.iterations(), 114);
        let link = partial_inverse::linkage_residual(
            &op,
            &s,
            &partial_inverse::GraphPoint::new(trace.final_x.clone(), trace.final_y.clone()),
        )
        .unwrap();
        assert!(link <= 1e-8, "linkage residual {link}");
        assert!((&trace.final_x - &xs).norm() <= 1e-8);
        assert!((&trace.final_y - &ys).norm() <= 1e-8);

        // ᾱ = min((1+γρ)/λx, (1+μ/γ)/λy) = min(5/9, 5/9).
        assert_relative_eq!(trace.alpha_bar.unwrap(), 5.0 / 9.0, epsilon = 1e-12);

        // Lyapunov and residual decrease monotonically; the measured α never
        // drops below ᾱ and the halfspace gap at the solution stays
        // nonnegative.
        for pair in trace.rows.windows(2) {
            assert!(pair[1].lyapunov.unwrap() <= pair[0].lyapunov.unwrap() * (1.0 + 1e-12) + 1e-15);
            assert!(pair[1].res <= pair[0].res * (1.0 + 1e-12) + 1e-15);
        }
        for row in &trace.rows {
            assert!(row.alpha.unwrap() >= 5.0 / 9.0 - 1e-9);
            assert!(row.gap.unwrap() >= -1e-9);
        }
    }

    #[test]
    fn rate_bound_holds_along_block_run() {
        let (op, s, xs, ys) = block_fixture();
        let cfg = block_config();
        let opts = RunOptions {
            known_solution: Some((&xs, &ys)),
            oblique: Some((-1.0, -0.5)),
            region: None,
        };
        let trace = run_progdec(
            &op,
            &s,
            &cfg,
            DVector::from_vec(vec![-2.0, -2.0, -2.0, -2.0]),
            DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0]),
            &opts,
        );
        let alpha_bar = trace.alpha_bar.unwrap();
        let lyap0 = trace.rows[0].lyapunov.unwrap();
        let mut min_res = f64::INFINITY;
        for (n, row) in trace.rows.iter().enumerate() {
            min_res = min_res.min(row.res);
            let bound = lyap0 / ((n as f64 + 1.0) * (2.0 * alpha_bar - 1.0));
            assert!(
                min_res <= bound * (1.0 + 1e-8),
                "rate bound violated at n = {n}: {min_res} > {bound}"
            );
        }
    }

    #[test]
    fn unit_stepsizes_stall_on_block_system() {
        let (op, s, _, _) = block_fixture();
        let cfg = SolverConfig::new(1.0, 1.0, 1.0).with_termination(500, 1e-9);
        let trace = run_progdec(
            &op,
            &s,
            &cfg,
            DVector::from_vec(vec![-2.0, -2.0, -2.0, -2.0]),
            DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0]),
            &RunOptions::default(),
        );
        assert_ne!(trace.status, RunStatus::Converged);
        let min_res = trace
            .rows
            .iter()
            .map(|r| r.res)
            .fold(f64::INFINITY, f64::min);
        assert!(min_res >= 1e-3, "min res {min_res}");
    }

    #[test]
    fn three_solvers_agree_to_machine_precision() {
        let (op, s) = tightness_fixture(1.0);
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        let y0 = DVector::from_vec(vec![0.0, 1.0]);
        let iters = 200;
        let cfg = SolverConfig::new(1.0, 1.0, 1.0).with_termination(iters, 0.0);

        let trace_pd = run_progdec(
            &op,
            &s,
            &cfg,
            x0.clone(),
            y0.clone(),
            &RunOptions::default(),
        );

        let t = partial_inverse::partial_inverse_affine(&op, &s).unwrap();
        let pcfg = PppaConfig::structured(&s, &cfg, None);
        let trace_pp = run_pppa(&t, &pcfg, &x0 + &y0, None);

        let s0 = &x0 - &y0; // γ = 1
        let trace_dr = run_drs(&op, &s, 1.0, 1.0, s0, iters, 0.0, &RunOptions::default());

        assert_eq!(trace_pd.iterations(), iters);
        assert_eq!(trace_pp.iterations(), iters);
        assert_eq!(trace_dr.iterations(), iters);
        let mut dev = 0.0_f64;
        for k in 0..iters {
            let z_pd = &trace_pd.rows[k].x + &trace_pd.rows[k].y;
            dev = dev.max((&z_pd - &trace_pp.rows[k].x).amax());
            dev = dev.max((&trace_pd.rows[k].x - &trace_dr.rows[k].x).amax());
            dev = dev.max((&trace_pd.rows[k].y - &trace_dr.rows[k].y).amax());
        }
        assert!(dev <= 1e-12, "max deviation {dev}");
    }

    #[test]
    fn decoupling_matches_proximal_form_with_split_relaxation() {
        let (op, s) = tightness_fixture(1.0);
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        let y0 = DVector::from_vec(vec![0.0, 1.0]);
        let iters = 200;
        let cfg = SolverConfig::new(1.3, 0.7, 0.4).with_termination(iters, 0.0);

        let trace_pd = run_progdec(
            &op,
            &s,
            &cfg,
            x0.clone(),
            y0.clone(),
            &RunOptions::default(),
        );
        let t = partial_inverse::partial_inverse_affine(&op, &s).unwrap();
        let pcfg = PppaConfig::structured(&s, &cfg, None);
        let trace_pp = run_pppa(&t, &pcfg, &x0 + &y0, None);

        let mut dev = 0.0_f64;
        for k in 0..iters {
            let z_pd = &trace_pd.rows[k].x + &trace_pd.rows[k].y;
            dev = dev.max((&z_pd - &trace_pp.rows[k].x).amax());
        }
        assert!(dev <= 1e-12, "max deviation {dev}");
    }

    #[test]
    fn proximal_step_hand_example() {
        // (M + T)z̄ = Mz with M = I, T = [[1,1],[−1,1]], z = (1,1):
        // [[2,1],[−1,2]] z̄ = (1,1) gives z̄ = (0.2, 0.6).
        let (op, s) = tightness_fixture(1.0);
        let t = partial_inverse::partial_inverse_affine(&op, &s).unwrap();
        let cfg = PppaConfig {
            m: DMatrix::identity(2, 2),
            lambda: DMatrix::identity(2, 2),
            v: None,
            max_iter: 10,
            tol: 1e-9,
        };
        let (zplus, zbar) = pppa_step(&t, &cfg, &DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert_relative_eq!(zbar[0], 0.2, epsilon = 1e-14);
        assert_relative_eq!(zbar[1], 0.6, epsilon = 1e-14);
        assert!((zplus - zbar).norm() <= 1e-14);
    }

    #[test]
    fn spectral_radius_matches_closed_form() {
        // For the 2×2 family the update map eigenvalues are complex with
        // |λ|² = 1 − λ(2(1+a+a²) − λ(1+a²)) / ((1+a)² + 1).
        for &a in &[0.5, 1.0, 2.0] {
            let (op, s) = tightness_fixture(a);
            let denom = (1.0 + a) * (1.0 + a) + 1.0;
            let mut lam = 0.1;
            while lam < 3.55 {
                let cfg = SolverConfig::new(1.0, lam, lam);
                let radius = spectral_radius_linear(&op, &s, &cfg).unwrap();
                let closed =
                    (1.0 - lam * (2.0 * (1.0 + a + a * a) - lam * (1.0 + a * a)) / denom).sqrt();
                assert_relative_eq!(radius, closed, epsilon = 1e-12);
                lam += 0.2;
            }
        }
    }

    #[test]
    fn spectral_radius_boundary_cases() {
        let (op, s) = tightness_fixture(1.0);
        let r1 = spectral_radius_linear(&op, &s, &SolverConfig::new(1.0, 1.0, 1.0)).unwrap();
        assert_relative_eq!(r1, 1.0 / 5.0_f64.sqrt(), epsilon = 1e-12);
        let r3 = spectral_radius_linear(&op, &s, &SolverConfig::new(1.0, 3.0, 3.0)).unwrap();
        assert_relative_eq!(r3, 1.0, epsilon = 1e-12);
        let r32 = spectral_radius_linear(&op, &s, &SolverConfig::new(1.0, 3.2, 3.2)).unwrap();
        assert!(r32 > 1.0);

        let (bop, bs, _, _) = block_fixture();
        let fig = spectral_radius_linear(&bop, &bs, &block_config()).unwrap();
        assert!(fig < 1.0, "radius {fig}");
        let sp = spectral_radius_linear(&bop, &bs, &SolverConfig::new(1.0, 1.0, 1.0)).unwrap();
        assert!(sp > 1.0, "radius {sp}");
    }

    #[test]
    fn douglas_rachford_convergence_and_divergence() {
        let (op, s) = tightness_fixture(1.0);
        let s0 = DVector::from_vec(vec![1.0, -1.0]); // x0 = (1,0), y0 = (0,1)
        let ok = run_drs(
            &op,
            &s,
            1.0,
            1.0,
            s0.clone(),
            20_000,
            1e-9,
            &RunOptions::default(),
        );
        assert_eq!(ok.status, RunStatus::Converged);
        let link = partial_inverse::linkage_residual(
            &op,
            &s,
            &partial_inverse::GraphPoint::new(ok.final_x.clone(), ok.final_y.clone()),
        )
        .unwrap();
        assert!(link <= 1e-8);

        let bad = run_drs(&op, &s, 1.0, 3.2, s0, 20_000, 1e-9, &RunOptions::default());
        assert_eq!(bad.status, RunStatus::Diverged);
    }

    #[test]
    fn iterates_stay_in_their_subspaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let n = 6;
            let mut m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            for i in 0..n {
                m[(i, i)] += 3.0;
            }
            let shift = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let op = Operator::affine(m, shift).unwrap();
            let spans: Vec<DVector<f64>> = (0..3)
                .map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
                .collect();
            let s = Subspace::from_basis(&spans).unwrap();
            let x0 = s
                .project(&DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
                .unwrap();
            let y0 = s
                .project_complement(&DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
                .unwrap();
            let cfg = SolverConfig::new(0.9, 1.1, 0.8).with_termination(50, 0.0);
            let trace = run_progdec(&op, &s, &cfg, x0, y0, &RunOptions::default());
            for row in &trace.rows {
                assert!(s.project_complement(&row.x).unwrap().norm() <= 1e-10);
                assert!(s.project(&row.y).unwrap().norm() <= 1e-10);
                assert!(s.project_complement(&row.xbar).unwrap().norm() <= 1e-10);
                assert!(s.project(&row.ybar).unwrap().norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn off_subspace_starts_are_projected() {
        let (op, s) = tightness_fixture(1.0);
        let cfg = SolverConfig::new(1.0, 1.0, 1.0).with_termination(5, 0.0);
        let trace = run_progdec(
            &op,
            &s,
            &cfg,
            DVector::from_vec(vec![1.0, 1.0]),
            DVector::from_vec(vec![0.5, 0.3]),
            &RunOptions::default(),
        );
        assert_eq!(trace.rows[0].x, DVector::from_vec(vec![1.0, 0.0]));
        assert_eq!(trace.rows[0].y, DVector::from_vec(vec![0.0, 0.3]));
    }

    #[test]
    fn region_monitor_flags_departure() {
        let (op, s) = tightness_fixture(1.0);
        let cfg = SolverConfig::new(1.0, 1.0, 1.0);
        let tiny = Region::ball(DVector::zeros(2), 0.1).unwrap();
        let opts = RunOptions {
            known_solution: None,
            oblique: None,
            region: Some(&tiny),
        };
        let trace = run_progdec(
            &op,
            &s,
            &cfg,
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
            &opts,
        );
        assert!(trace.left_region);
        assert_eq!(trace.status, RunStatus::Converged);

        // a generous region is never left
        let big = Region::ball(DVector::zeros(2), 10.0).unwrap();
        let opts = RunOptions {
            known_solution: None,
            oblique: None,
            region: Some(&big),
        };
        let trace = run_progdec(
            &op,
            &s,
            &cfg,
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
            &opts,
        );
        assert!(!trace.left_region);
    }

    #[test]
    fn invalid_inputs_produce_error_status() {
        let (op, s) = tightness_fixture(1.0);
        let bad = SolverConfig::new(0.0, 1.0, 1.0);
        let trace = run_progdec(
            &op,
            &s,
            &bad,
            DVector::zeros(2),
            DVector::zeros(2),
            &RunOptions::default(),
        );
        assert_eq!(trace.status, RunStatus::Error);
        assert!(trace.error.is_some());
        assert!(trace.rows.is_empty());
        assert_eq!(trace.status.exit_code(), 1);

        // proximal form rejects nonlinear operators
        let spec = crate::operators::SmoothSpec::new(
            |x: &DVector<f64>| x[0].powi(4),
            |x: &DVector<f64>| DVector::from_vec(vec![4.0 * x[0].powi(3), 0.0]),
        );
        let smooth = Operator::smooth_gradient(2, spec);
        let cfg = PppaConfig {
            m: DMatrix::identity(2, 2),
            lambda: DMatrix::identity(2, 2),
            v: None,
            max_iter: 10,
            tol: 1e-9,
        };
        let trace = run_pppa(&smooth, &cfg, DVector::zeros(2), None);
        assert_eq!(trace.status, RunStatus::Error);

        // non-commuting relaxation is rejected
        let t = partial_inverse::partial_inverse_affine(&op, &s).unwrap();
        let cfg = PppaConfig {
            m: DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
            lambda: DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
            v: None,
            max_iter: 10,
            tol: 1e-9,
        };
        let trace = run_pppa(&t, &cfg, DVector::zeros(2), None);
        assert_eq!(trace.status, RunStatus::Error);
        assert!(trace.error.as_deref().unwrap_or("").contains("commute"));
    }

    #[test]
    fn diagnostics_absent_without_context() {
        let (op, s) = tightness_fixture(1.0);
        let cfg = SolverConfig::new(1.0, 1.0, 1.0).with_termination(5, 0.0);
        let trace = run_progdec(
            &op,
            &s,
            &cfg,
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
            &RunOptions::default(),
        );
        for row in &trace.rows {
            assert!(row.lyapunov.is_none());
            assert!(row.alpha.is_none());
            assert!(row.gap.is_none());
        }
        assert!(trace.alpha_bar.is_none());
    }

    #[test]
    fn exit_codes_follow_convention() {
        assert_eq!(RunStatus::Converged.exit_code(), 0);
        assert_eq!(RunStatus::Error.exit_code(), 1);
        assert_eq!(RunStatus::MaxIter.exit_code(), 2);
        assert_eq!(RunStatus::Diverged.exit_code(), 3);
        assert_eq!(RunStatus::Converged.to_string(), "Converged");
    }
}
