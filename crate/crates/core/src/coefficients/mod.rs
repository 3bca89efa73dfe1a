//! Material tensors ε, μ, σ and the sampled checks of their standing hypotheses.
//!
//! All three tensors are symmetric, uniformly elliptic (σ only semi-definite)
//! with constant `Λ`, and tend to isotropic constants `(ε₀, μ₀, σ₀)` at infinity.
//! On bounded domains the constants are fixed to `(1, 1, 0)`.

mod grid;
mod profile;
mod split;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grid::{GridSidecar, GridTensor};
pub use profile::{smoothstep, smoothstep_d1, smoothstep_d2, RadialProfile, RadialTerm, TensorField};
pub use split::{split, CoefficientSplit};

use crate::linalg;
use crate::{Mat3, Point};

/// Relative slack on the ellipticity bounds, absorbing rounding in `ηᵀTη`.
const BOUND_SLACK: f64 = 1e-12;
/// Componentwise symmetry tolerance.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CoefficientError {
    #[error("non-finite {tensor} entry at point ({x}, {y}, {z})", x = point.x, y = point.y, z = point.z)]
    NonFinite { tensor: Tensor, point: Point },
    #[error("deviation from the value at infinity never drops below {delta}: best {best_deviation:.3e} at radius {radius}")]
    DecayNotReached { delta: f64, best_deviation: f64, radius: f64 },
    #[error("invalid coefficient input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tensor {
    Eps,
    Mu,
    Sigma,
}

impl Tensor {
    pub const ALL: [Tensor; 3] = [Tensor::Eps, Tensor::Mu, Tensor::Sigma];
}

impl std::fmt::Display for Tensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Tensor::Eps => "eps",
            Tensor::Mu => "mu",
            Tensor::Sigma => "sigma",
        })
    }
}

/// Scalar limits `(ε₀, μ₀, σ₀)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtInfinity {
    pub eps0: f64,
    pub mu0: f64,
    pub sigma0: f64,
}

impl AtInfinity {
    pub const BOUNDED: AtInfinity = AtInfinity { eps0: 1.0, mu0: 1.0, sigma0: 0.0 };

    pub fn new(eps0: f64, mu0: f64, sigma0: f64) -> Result<Self, CoefficientError> {
        let v = AtInfinity { eps0, mu0, sigma0 };
        v.check()?;
        Ok(v)
    }

    fn check(&self) -> Result<(), CoefficientError> {
        if self.eps0 > 0.0 && self.mu0 > 0.0 && self.sigma0 >= 0.0 && self.eps0.is_finite() && self.mu0.is_finite() && self.sigma0.is_finite() {
            Ok(())
        } else {
            Err(CoefficientError::InvalidInput(format!("values at infinity need eps0 > 0, mu0 > 0, sigma0 >= 0, got {self:?}")))
        }
    }

    pub fn get(&self, which: Tensor) -> f64 {
        match which {
            Tensor::Eps => self.eps0,
            Tensor::Mu => self.mu0,
            Tensor::Sigma => self.sigma0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoefficientField {
    pub eps: TensorField,
    pub mu: TensorField,
    pub sigma: TensorField,
    pub lambda: f64,
    pub at_infinity: AtInfinity,
    pub bounded_domain: bool,
}

impl CoefficientField {
    pub fn new(eps: TensorField, mu: TensorField, sigma: TensorField, lambda: f64, at_infinity: AtInfinity) -> Result<Self, CoefficientError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(CoefficientError::InvalidInput(format!("ellipticity constant must be positive, got {lambda}")));
        }
        at_infinity.check()?;
        for (which, t) in [(Tensor::Eps, &eps), (Tensor::Mu, &mu), (Tensor::Sigma, &sigma)] {
            t.check().map_err(|e| CoefficientError::InvalidInput(format!("{which}: {e}")))?;
        }
        Ok(CoefficientField { eps, mu, sigma, lambda, at_infinity, bounded_domain: false })
    }

    /// Coefficients on a bounded domain; the values at infinity are `(1, 1, 0)`.
    pub fn bounded(eps: TensorField, mu: TensorField, sigma: TensorField, lambda: f64) -> Result<Self, CoefficientError> {
        let mut f = Self::new(eps, mu, sigma, lambda, AtInfinity::BOUNDED)?;
        f.bounded_domain = true;
        Ok(f)
    }

    /// Constant isotropic coefficients with the smallest admissible `Λ`.
    pub fn isotropic(eps0: f64, mu0: f64, sigma0: f64) -> Result<Self, CoefficientError> {
        let lambda = [eps0, 1.0 / eps0, mu0, 1.0 / mu0, sigma0, 1.0].into_iter().fold(0.0, f64::max);
        Self::new(
            TensorField::scalar(eps0),
            TensorField::scalar(mu0),
            TensorField::scalar(sigma0),
            lambda,
            AtInfinity::new(eps0, mu0, sigma0)?,
        )
    }

    pub fn tensor(&self, which: Tensor) -> &TensorField {
        match which {
            Tensor::Eps => &self.eps,
            Tensor::Mu => &self.mu,
            Tensor::Sigma => &self.sigma,
        }
    }

    pub fn tensor_mut(&mut self, which: Tensor) -> &mut TensorField {
        match which {
            Tensor::Eps => &mut self.eps,
            Tensor::Mu => &mut self.mu,
            Tensor::Sigma => &mut self.sigma,
        }
    }

    pub fn eval(&self, which: Tensor, x: &Point) -> Mat3 {
        self.tensor(which).eval(x)
    }

    /// Constant isotropic tensor reached at infinity.
    pub fn limit(&self, which: Tensor) -> Mat3 {
        linalg::scalar(self.at_infinity.get(which))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Lower,
    Upper,
}

/// A sampled point and direction at which `ηᵀTη` leaves its admissible range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: [f64; 3],
    pub direction: [f64; 3],
    pub tensor: Tensor,
    pub quadratic_form: f64,
    pub bound: Bound,
    pub limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    pub point: [f64; 3],
    pub tensor: Tensor,
    pub max_difference: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub points_checked: usize,
    pub directions_checked: usize,
    pub violations: Vec<Violation>,
    pub asymmetries: Vec<Asymmetry>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.asymmetries.is_empty()
    }
}

/// Checks `Λ⁻¹ ≤ ηᵀεη, ηᵀμη ≤ Λ`, `0 ≤ ηᵀση ≤ Λ` and symmetry on the sample.
pub fn validate(field: &CoefficientField, sample_points: &[Point], directions: &[Point]) -> Result<ValidationReport, CoefficientError> {
    if sample_points.is_empty() || directions.is_empty() {
        return Err(CoefficientError::InvalidInput("validation needs at least one point and one direction".into()));
    }
    for d in directions {
        if (d.norm() - 1.0).abs() > 1e-10 {
            return Err(CoefficientError::InvalidInput(format!("direction {:?} is not a unit vector", d.as_slice())));
        }
    }
    let lam = field.lambda;
    let mut report = ValidationReport { points_checked: sample_points.len(), directions_checked: directions.len(), ..Default::default() };
    for x in sample_points {
        for which in Tensor::ALL {
            let m = field.eval(which, x);
            if !linalg::is_finite(&m) {
                return Err(CoefficientError::NonFinite { tensor: which, point: *x });
            }
            let asym = linalg::asymmetry(&m);
            if asym > SYMMETRY_TOL {
                report.asymmetries.push(Asymmetry { point: (*x).into(), tensor: which, max_difference: asym });
            }
            let (lower, upper) = match which {
                Tensor::Sigma => (0.0, lam),
                _ => (1.0 / lam, lam),
            };
            for eta in directions {
                let q = eta.dot(&(m * eta));
                let slack = BOUND_SLACK * (1.0 + lam);
                if q < lower - slack {
                    report.violations.push(Violation {
                        point: (*x).into(),
                        direction: (*eta).into(),
                        tensor: which,
                        quadratic_form: q,
                        bound: Bound::Lower,
                        limit: lower,
                    });
                } else if q > upper + slack {
                    report.violations.push(Violation {
                        point: (*x).into(),
                        direction: (*eta).into(),
                        tensor: which,
                        quadratic_form: q,
                        bound: Bound::Upper,
                        limit: upper,
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn identity_field(lambda: f64) -> CoefficientField {
        CoefficientField::new(TensorField::scalar(1.0), TensorField::scalar(1.0), TensorField::scalar(0.0), lambda, AtInfinity::new(1.0, 1.0, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn identity_tensors_pass_with_unit_lambda() {
        let pts = sampling::random_ball(50, 3.0, 1);
        let report = validate(&identity_field(1.0), &pts, &sampling::test_directions(10, 2)).unwrap();
        assert!(report.passed(), "{:?}", report.violations.first());
    }

    #[test]
    fn doubled_permittivity_violates_every_sample() {
        let mut f = identity_field(1.0);
        f.eps = TensorField::scalar(2.0);
        let pts = sampling::random_ball(20, 1.0, 3);
        let dirs = sampling::test_directions(3, 4);
        let report = validate(&f, &pts, &dirs).unwrap();
        assert_eq!(report.violations.len(), pts.len() * dirs.len());
        for v in &report.violations {
            assert_eq!(v.tensor, Tensor::Eps);
            assert_eq!(v.bound, Bound::Upper);
            assert!((v.quadratic_form - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_bump_passes_with_lambda_two() {
        // ε = (1 + ½e^{−|x|²}) I has quadratic forms in [1, 1.5] ⊂ [½, 2].
        let mut f = identity_field(2.0);
        f.eps = TensorField::radial(Mat3::identity(), vec![RadialTerm::new(Mat3::identity() * 0.5, RadialProfile::Gaussian { width: 1.0 })]);
        let pts = sampling::random_ball(1000, 4.0, 5);
        let dirs = sampling::test_directions(8, 6);
        // direct arithmetic oracle on the same sample
        for x in &pts {
            let s = 1.0 + 0.5 * (-x.norm_squared()).exp();
            assert!((0.5..=2.0).contains(&s));
        }
        assert!(validate(&f, &pts, &dirs).unwrap().passed());
    }

    #[test]
    fn non_finite_entry_names_the_point() {
        let mut f = identity_field(1.0);
        f.sigma = TensorField::scalar(f64::NAN);
        let p = Point::new(0.5, -1.0, 2.0);
        match validate(&f, &[p], &[Point::x()]) {
            Err(CoefficientError::NonFinite { tensor, point }) => {
                assert_eq!(tensor, Tensor::Sigma);
                assert_eq!(point, p);
            }
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_tensor_is_reported() {
        let mut f = identity_field(2.0);
        let mut m = Mat3::identity();
        m[(0, 1)] = 1e-6;
        f.mu = TensorField::constant(m);
        let report = validate(&f, &[Point::zeros()], &[Point::x()]).unwrap();
        assert_eq!(report.asymmetries.len(), 1);
        assert_eq!(report.asymmetries[0].tensor, Tensor::Mu);
    }

    #[test]
    fn bounded_convention_is_forced() {
        let f = CoefficientField::bounded(TensorField::scalar(3.0), TensorField::scalar(1.0), TensorField::scalar(0.5), 4.0).unwrap();
        assert!(f.bounded_domain);
        assert_eq!(f.at_infinity, AtInfinity::BOUNDED);
    }

    #[test]
    fn rejects_bad_limits() {
        assert!(AtInfinity::new(0.0, 1.0, 0.0).is_err());
        assert!(AtInfinity::new(1.0, 1.0, -1.0).is_err());
        assert!(CoefficientField::isotropic(1.0, 1.0, 0.0).is_ok());
    }
}
