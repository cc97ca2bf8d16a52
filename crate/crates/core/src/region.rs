//! Sampling regions for local certification: balls and axis-aligned boxes
//! with membership tests and seeded uniform sampling.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A bounded region of the ambient space used to localize sampled checks.
#[derive(Debug, Clone)]
pub enum Region {
    /// Closed Euclidean ball { x : ‖x − center‖ ≤ radius }.
    Ball { center: DVector<f64>, radius: f64 },
    /// Axis-aligned box { x : lower ≤ x ≤ componentwise ≤ upper }.
    Box {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
}

impl Region {
    /// Ball of `radius` around `center`.
    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::OutOfRange {
                what: "radius",
                detail: format!("ball radius must be positive and finite, got {radius}"),
            });
        }
        Ok(Region::Ball { center, radius })
    }

    /// Box with elementwise bounds `lower` ≤ `upper`.
    pub fn bounding_box(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                context: "Region::bounding_box",
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::OutOfRange {
                what: "bounds",
                detail: "box lower bound exceeds upper bound in some coordinate".into(),
            });
        }
        Ok(Region::Box { lower, upper })
    }

    /// Cube [−half_width, half_width]ⁿ.
    pub fn centered_cube(dim: usize, half_width: f64) -> Result<Self> {
        Self::bounding_box(
            DVector::from_element(dim, -half_width),
            DVector::from_element(dim, half_width),
        )
    }

    /// Ambient dimension of the region.
    pub fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } => center.len(),
            Region::Box { lower, .. } => lower.len(),
        }
    }

    /// Membership test (boundary counts as inside).
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        match self {
            Region::Ball { center, radius } => {
                x.len() == center.len() && (x - center).norm() <= *radius
            }
            Region::Box { lower, upper } => {
                x.len() == lower.len()
                    && x.iter()
                        .zip(lower.iter().zip(upper.iter()))
                        .all(|(xi, (l, u))| xi >= l && xi <= u)
            }
        }
    }

    /// Draws one point uniformly from the region.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> DVector<f64> {
        match self {
            Region::Ball { center, radius } => {
                let n = center.len();
                // Direction from a standard gaussian, radius from the
                // inverse-CDF u^{1/n} of the uniform ball distribution.
                let mut dir = DVector::from_fn(n, |_, _| rand_distr_standard_normal(rng));
                let norm = dir.norm();
                if norm <= f64::MIN_POSITIVE {
                    return center.clone();
                }
                dir /= norm;
                let u: f64 = rng.gen_range(0.0..1.0);
                center + dir * (radius * u.powf(1.0 / n as f64))
            }
            Region::Box { lower, upper } => DVector::from_fn(lower.len(), |i, _| {
                if lower[i] == upper[i] {
                    lower[i]
                } else {
                    rng.gen_range(lower[i]..upper[i])
                }
            }),
        }
    }
}

/// Standard normal draw via Box–Muller (keeps the dependency surface small).
fn rand_distr_standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn membership() {
        let ball = Region::ball(DVector::from_vec(vec![1.0, 0.0]), 2.0).unwrap();
        assert!(ball.contains(&DVector::from_vec(vec![2.5, 0.0])));
        assert!(!ball.contains(&DVector::from_vec(vec![3.5, 0.0])));

        let cube = Region::centered_cube(3, 5.0).unwrap();
        assert!(cube.contains(&DVector::from_vec(vec![5.0, -5.0, 0.0])));
        assert!(!cube.contains(&DVector::from_vec(vec![5.1, 0.0, 0.0])));
    }

    #[test]
    fn invalid_constructions() {
        assert!(Region::ball(DVector::zeros(2), 0.0).is_err());
        assert!(Region::ball(DVector::zeros(2), f64::NAN).is_err());
        assert!(
            Region::bounding_box(DVector::from_vec(vec![1.0]), DVector::from_vec(vec![0.0]))
                .is_err()
        );
        assert!(Region::bounding_box(DVector::zeros(2), DVector::zeros(3)).is_err());
    }

    #[test]
    fn samples_stay_inside_and_are_deterministic() {
        let regions = [
            Region::ball(DVector::from_vec(vec![0.5, -1.0, 2.0]), 3.0).unwrap(),
            Region::centered_cube(3, 4.0).unwrap(),
        ];
        for region in &regions {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let pts: Vec<_> = (0..500).map(|_| region.sample(&mut rng)).collect();
            assert!(pts.iter().all(|p| region.contains(p)));
            // deterministic replay
            let mut rng2 = ChaCha8Rng::seed_from_u64(11);
            let replay: Vec<_> = (0..500).map(|_| region.sample(&mut rng2)).collect();
            assert_eq!(pts, replay);
            // samples are spread out, not collapsed to a point
            let spread = pts
                .iter()
                .map(|p| (p - &pts[0]).norm())
                .fold(0.0_f64, f64::max);
            assert!(spread > 1.0);
        }
    }

    #[test]
    fn ball_sampling_fills_the_volume() {
        // Fraction of draws with ‖x‖ ≤ r/2 should approach (1/2)³ = 0.125
        // for a uniform ball in R³.
        let region = Region::ball(DVector::zeros(3), 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 20_000;
        let inner = (0..n)
            .filter(|_| region.sample(&mut rng).norm() <= 1.0)
            .count();
        let frac = inner as f64 / n as f64;
        assert!((frac - 0.125).abs() < 0.01, "frac = {frac}");
    }
}
