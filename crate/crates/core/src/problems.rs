//! Canonical linkage problems bundling operator, subspace, known solutions,
//! certified (μ, ρ) coefficients, and admissible-region metadata: runnable
//! fixtures for the solvers and the command line.

use nalgebra::{DMatrix, DVector};

use crate::certify::{self, SemimonCertificate};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{Operator, SmoothSpec};
use crate::partial_inverse::{self, GraphPoint};
use crate::region::Region;
use crate::subspace::Subspace;

/// Seed of the constructor-time sampled verification of anchored
/// certificates (smooth problems).
const ANCHOR_CHECK_SEED: u64 = 17;

/// A linkage problem: find x ∈ X, y ∈ X⊥ with y ∈ S(x), together with
/// whatever is known about it.
#[derive(Debug, Clone)]
pub struct LinkageProblem {
    pub label: String,
    pub op: Operator,
    pub subspace: Subspace,
    /// Known solutions; every entry has linkage residual ≤ 1e-9.
    pub known_solutions: Vec<GraphPoint>,
    /// Certified (μ, ρ) semimonotonicity, when known. For linear operators
    /// the margin is the test-matrix eigenvalue margin; for anchored smooth
    /// certificates it is the worst sampled slack on `region`.
    pub certificate: Option<SemimonCertificate>,
    /// True when the certificate is valid at the anchor solution only
    /// (pointwise semimonotonicity), rather than on the whole graph.
    pub anchored: bool,
    /// Region of local validity for anchored certificates and sampling.
    pub region: Option<Region>,
}

impl LinkageProblem {
    /// The first known solution, if any.
    pub fn solution(&self) -> Option<&GraphPoint> {
        self.known_solutions.first()
    }

    /// Certified (μ, ρ) weights for diagnostics and planning.
    pub fn oblique(&self) -> Option<(f64, f64)> {
        self.certificate.as_ref().map(|c| (c.mu, c.rho))
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.subspace.dim_ambient()
    }
}

/// The 2×2 family S = (1/a)[[1+a², 1], [1, 1]] across the first coordinate
/// axis. Its certificate μ = ρ = a/(1+a²) is exactly tight: the relaxation
/// bound 2(1 + γρ) at γ = 1 is attained by divergent runs immediately above
/// it.
pub fn tightness_problem(a: f64) -> Result<LinkageProblem> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::OutOfRange {
            what: "a",
            detail: format!("the tight family requires a nonzero finite parameter, got {a}"),
        });
    }
    let matrix = DMatrix::from_row_slice(2, 2, &[(1.0 + a * a) / a, 1.0 / a, 1.0 / a, 1.0 / a]);
    let subspace = Subspace::from_basis(&[DVector::from_vec(vec![1.0, 0.0])])?;
    let rho_a = a / (1.0 + a * a);
    let certificate = certify::check_semimonotone_linear(&matrix, &subspace, rho_a, rho_a)?;
    let op = Operator::affine(matrix, DVector::zeros(2))?;
    Ok(LinkageProblem {
        label: format!("tightness(a={a})"),
        op,
        subspace,
        known_solutions: vec![GraphPoint::new(DVector::zeros(2), DVector::zeros(2))],
        certificate: Some(certificate),
        anchored: false,
        region: None,
    })
}

/// Two uncoupled 2×2 linear blocks M₁ = [[−1,2],[−2,−1]], M₂ = [[0,1],[0,0]]
/// under a consensus subspace, encoding the system M₁(x) + M₂(x) = (2,−3).
/// Certified (μ, ρ) = (−1, −½) with margin exactly zero; its admissible
/// stepsizes are γ ∈ (1, 2).
pub fn linear_system_problem() -> LinkageProblem {
    let matrix = DMatrix::from_row_slice(
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
    let subspace = Subspace::consensus(2, 2);
    let certificate =
        certify::check_semimonotone_linear(&matrix, &subspace, -1.0, -0.5).expect("4x4 test");
    let op = Operator::affine(matrix, shift).expect("4x4 affine");
    LinkageProblem {
        label: "linear-system".into(),
        op,
        subspace,
        known_solutions: vec![GraphPoint::new(
            DVector::from_vec(vec![1.0, 1.0, 1.0, 1.0]),
            DVector::from_vec(vec![1.0, -3.0, -1.0, 3.0]),
        )],
        certificate: Some(certificate),
        anchored: false,
        region: None,
    }
}

/// Gradient of f(x) = x₁x₂ + b(x₃ − x₁²)² with exact Hessian.
pub fn rosenbrock_gradient(b: f64) -> Operator {
    let grad = move |x: &DVector<f64>| {
        DVector::from_vec(vec![
            x[1] - 4.0 * b * x[0] * (x[2] - x[0] * x[0]),
            x[0],
            2.0 * b * (x[2] - x[0] * x[0]),
        ])
    };
    let hess = move |x: &DVector<f64>| {
        DMatrix::from_row_slice(
            3,
            3,
            &[
                12.0 * b * x[0] * x[0] - 4.0 * b * x[2],
                1.0,
                -4.0 * b * x[0],
                1.0,
                0.0,
                0.0,
                -4.0 * b * x[0],
                0.0,
                2.0 * b,
            ],
        )
    };
    Operator::smooth_gradient(
        3,
        SmoothSpec::new(
            move |x: &DVector<f64>| x[0] * x[1] + b * (x[2] - x[0] * x[0]).powi(2),
            grad,
        )
        .with_hessian(hess),
    )
}

/// Nonconvex coupling f(x) = x₁x₂ + b(x₃ − x₁²)² over X = {x₁ = x₂} ⊂ R³,
/// anchored at the critical point 0 with certificate (μ, ρ) = (−9/4, −¼)
/// sampled over the box [−5, 5]³.
pub fn rosenbrock_problem(b: f64) -> Result<LinkageProblem> {
    if b <= 0.0 || !b.is_finite() {
        return Err(Error::OutOfRange {
            what: "b",
            detail: format!("the quartic coupling weight must be positive, got {b}"),
        });
    }
    let op = rosenbrock_gradient(b);
    let subspace = Subspace::from_basis(&[
        DVector::from_vec(vec![1.0, 1.0, 0.0]),
        DVector::from_vec(vec![0.0, 0.0, 1.0]),
    ])?;
    let anchor = GraphPoint::new(DVector::zeros(3), DVector::zeros(3));
    let region = Region::centered_cube(3, 5.0)?;
    let (mu, rho) = (-9.0 / 4.0, -0.25);
    let check = certify::sampled_semimon_check(
        &op,
        &subspace,
        &anchor,
        mu,
        rho,
        &region,
        certify::DEFAULT_SAMPLES,
        ANCHOR_CHECK_SEED,
    )?;
    let certificate = SemimonCertificate {
        mu,
        rho,
        subspace: subspace.clone(),
        margin: check.worst_violation,
        feasible: check.holds,
    };
    Ok(LinkageProblem {
        label: format!("rosenbrock(b={b})"),
        op,
        subspace,
        known_solutions: vec![anchor],
        certificate: Some(certificate),
        anchored: true,
        region: Some(region),
    })
}

/// Gradient of the double well f(x) = ½x₁² + ½x₂² − ¼x₁²x₂² with exact
/// Hessian.
pub fn double_well_gradient() -> Operator {
    Operator::smooth_gradient(
        2,
        SmoothSpec::new(
            |x: &DVector<f64>| {
                0.5 * x[0] * x[0] + 0.5 * x[1] * x[1] - 0.25 * x[0] * x[0] * x[1] * x[1]
            },
            |x: &DVector<f64>| {
                DVector::from_vec(vec![
                    x[0] - 0.5 * x[0] * x[1] * x[1],
                    x[1] - 0.5 * x[0] * x[0] * x[1],
                ])
            },
        )
        .with_hessian(|x: &DVector<f64>| {
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    1.0 - 0.5 * x[1] * x[1],
                    -x[0] * x[1],
                    -x[0] * x[1],
                    1.0 - 0.5 * x[0] * x[0],
                ],
            )
        }),
    )
}

/// Double well f(x) = ½x₁² + ½x₂² − ¼x₁²x₂² over the diagonal X = {x₁ = x₂},
/// anchored at the origin with certificate (μ, ρ) = (0, 1) valid on the ball
/// of radius 2 (and provably violated on larger neighbourhoods).
pub fn double_well_problem() -> LinkageProblem {
    let op = double_well_gradient();
    let subspace =
        Subspace::from_basis(&[DVector::from_vec(vec![1.0, 1.0])]).expect("diagonal basis");
    let anchor = GraphPoint::new(DVector::zeros(2), DVector::zeros(2));
    let region = Region::ball(DVector::zeros(2), 2.0).expect("radius 2");
    let (mu, rho) = (0.0, 1.0);
    let check = certify::sampled_semimon_check(
        &op,
        &subspace,
        &anchor,
        mu,
        rho,
        &region,
        certify::DEFAULT_SAMPLES,
        ANCHOR_CHECK_SEED,
    )
    .expect("sampling the double well");
    let certificate = SemimonCertificate {
        mu,
        rho,
        subspace: subspace.clone(),
        margin: check.worst_violation,
        feasible: check.holds,
    };
    LinkageProblem {
        label: "double-well".into(),
        op,
        subspace,
        known_solutions: vec![anchor],
        certificate: Some(certificate),
        anchored: true,
        region: Some(region),
    }
}

/// Consensus splitting of the linear equation Σᵢ Aᵢ x = b: the blkdiag
/// operator S(x₁,…,x_N) = (A₁x₁, …, A_N x_N − b) over the consensus
/// subspace. A certificate (μ P_X⊥, (Nρ/ν) P_X) is derived from per-block
/// semimonotonicity and the alignment value ν of the generalized
/// eigenproblem Aᵀ𝟙𝟙ᵀA ⪰ ν AᵀA, then re-verified before it is attached.
pub fn consensus_splitting_problem(
    blocks: &[DMatrix<f64>],
    b: &DVector<f64>,
) -> Result<LinkageProblem> {
    let n_blocks = blocks.len();
    if n_blocks == 0 {
        return Err(Error::OutOfRange {
            what: "blocks",
            detail: "consensus splitting requires at least one block".into(),
        });
    }
    let block_dim = b.len();
    for block in blocks {
        if block.nrows() != block_dim || block.ncols() != block_dim {
            return Err(Error::DimensionMismatch {
                context: "consensus block",
                expected: block_dim,
                got: block.nrows(),
            });
        }
    }
    let dim = n_blocks * block_dim;
    let mut matrix = DMatrix::zeros(dim, dim);
    for (i, block) in blocks.iter().enumerate() {
        matrix
            .view_mut((i * block_dim, i * block_dim), (block_dim, block_dim))
            .copy_from(block);
    }
    let mut shift = DVector::zeros(dim);
    shift
        .rows_mut((n_blocks - 1) * block_dim, block_dim)
        .copy_from(b);

    let subspace = Subspace::consensus(n_blocks, block_dim);
    let op = Operator::affine(matrix.clone(), shift)?;

    // known solution from (ΣAᵢ)x = b, when that system is nonsingular
    let mut known_solutions = Vec::new();
    let mut sum = DMatrix::zeros(block_dim, block_dim);
    for block in blocks {
        sum += block;
    }
    let scale = sum.amax().max(1.0);
    let lu = sum.lu();
    if lu.determinant().abs() >= 1e-12 * scale {
        if let Some(x) = lu.solve(b) {
            let mut primal = DVector::zeros(dim);
            for i in 0..n_blocks {
                primal.rows_mut(i * block_dim, block_dim).copy_from(&x);
            }
            let dual = op.eval(&primal)?;
            let candidate = GraphPoint::new(primal, dual);
            if partial_inverse::linkage_residual(&op, &subspace, &candidate)? <= 1e-9 {
                known_solutions.push(candidate);
            }
        }
    }

    // alignment: largest ν with Aᵀ𝟙𝟙ᵀA ⪰ ν AᵀA, i.e. N·AᵀP_X A ⪰ ν AᵀA
    let ata = matrix.transpose() * &matrix;
    let alignment = matrix.transpose() * subspace.projector() * &matrix * (n_blocks as f64);
    let nu = linalg::restricted_pencil_min(&alignment, &ata).unwrap_or(0.0);

    // per-block semimonotonicity margin at a fixed ρ: the worst eigenvalue
    // of sym(Aᵢ) − ρAᵢᵀAᵢ across blocks (the best μ compatible with ρ)
    let block_margin = |rho: f64| {
        blocks
            .iter()
            .map(|a| {
                let test = linalg::sym_part(a) - (a.transpose() * a) * rho;
                linalg::min_eigenvalue_symmetric(&test)
            })
            .fold(f64::INFINITY, f64::min)
    };

    // candidate (μ, ρ_composite) pairs, best first; each is re-verified on
    // the composite operator before it is attached
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    let mu0 = block_margin(0.0);
    if mu0 >= 0.0 {
        // monotone blocks: ρ = 0 always transfers; alignment may allow a
        // positive composite ρ on top of it
        let rho_block = blocks
            .iter()
            .filter_map(|a| {
                let c = linalg::sym_part(a) - DMatrix::identity(block_dim, block_dim) * mu0;
                linalg::restricted_pencil_min(&c, &(a.transpose() * a))
            })
            .fold(f64::INFINITY, f64::min);
        if rho_block.is_finite() && rho_block > 0.0 && nu > 1e-9 {
            candidates.push((mu0, n_blocks as f64 * rho_block / nu));
        }
        candidates.push((mu0, 0.0));
    } else if nu > 1e-9 {
        // nonmonotone blocks: trade ρ < 0 against AᵢᵀAᵢ until every block
        // passes with μ ≥ 0; block_margin is concave in ρ, so the feasible
        // ρ form an interval and the least-negative one is found by scan
        // plus bisection
        let mut scan = -1.0;
        let mut feasible_scan = None;
        for _ in 0..64 {
            if block_margin(scan) >= 0.0 {
                feasible_scan = Some(scan);
                break;
            }
            scan *= 2.0;
        }
        if let Some(found) = feasible_scan {
            let (mut good, mut bad) = (found, found / 2.0);
            for _ in 0..80 {
                let mid = 0.5 * (good + bad);
                if block_margin(mid) >= 0.0 {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            let scale = n_blocks as f64 / nu;
            candidates.push((block_margin(good).max(0.0), scale * good));
            candidates.push((block_margin(found).max(0.0), scale * found));
        }
    }

    let mut certificate = None;
    for (mu, rho) in candidates {
        let cert = certify::check_semimonotone_linear(&matrix, &subspace, mu, rho)?;
        if cert.feasible {
            certificate = Some(cert);
            break;
        }
    }

    Ok(LinkageProblem {
        label: format!("consensus(N={n_blocks}, n={block_dim})"),
        op,
        subspace,
        known_solutions,
        certificate,
        anchored: false,
        region: None,
    })
}
