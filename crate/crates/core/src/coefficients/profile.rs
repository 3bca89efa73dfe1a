use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::GridTensor;
use crate::{Mat3, Point};

/// Quintic smoothstep `6s⁵ − 15s⁴ + 10s³` clamped to `[0, 1]`; C² at both ends.
pub fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (s * 6.0 - 15.0) + 10.0)
}

pub fn smoothstep_d1(s: f64) -> f64 {
    if !(0.0..=1.0).contains(&s) {
        return 0.0;
    }
    30.0 * s * s * (s - 1.0) * (s - 1.0)
}

pub fn smoothstep_d2(s: f64) -> f64 {
    if !(0.0..=1.0).contains(&s) {
        return 0.0;
    }
    60.0 * s * (s - 1.0) * (2.0 * s - 1.0)
}

/// Scalar radial profile `p(d)` of the distance `d = |x − center|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RadialProfile {
    /// `exp(−(d/width)²)`
    Gaussian { width: f64 },
    /// `exp(−rate·d)`
    Exponential { rate: f64 },
    /// `(1 + d)^(−power)`
    Algebraic { power: f64 },
    /// `1 − smoothstep(d/radius)`, supported in the closed ball of `radius`.
    Bump { radius: f64 },
    /// `d` itself; unbounded, for local models only.
    Distance,
}

impl RadialProfile {
    pub fn eval(&self, d: f64) -> f64 {
        match *self {
            RadialProfile::Gaussian { width } => (-(d / width).powi(2)).exp(),
            RadialProfile::Exponential { rate } => (-rate * d).exp(),
            RadialProfile::Algebraic { power } => (1.0 + d).powf(-power),
            RadialProfile::Bump { radius } => 1.0 - smoothstep(d / radius),
            RadialProfile::Distance => d,
        }
    }

    /// Radius beyond which the profile vanishes identically, if any.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            RadialProfile::Bump { radius } => Some(radius),
            _ => None,
        }
    }

    pub(crate) fn check(&self) -> Result<(), String> {
        let ok = match *self {
            RadialProfile::Gaussian { width } => width > 0.0 && width.is_finite(),
            RadialProfile::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            RadialProfile::Algebraic { power } => power > 0.0 && power.is_finite(),
            RadialProfile::Bump { radius } => radius > 0.0 && radius.is_finite(),
            RadialProfile::Distance => true,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("invalid radial profile parameters {self:?}"))
        }
    }
}

/// One term `amplitude · p(|x − center|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialTerm {
    pub amplitude: Mat3,
    pub profile: RadialProfile,
    pub center: Point,
}

impl RadialTerm {
    pub fn new(amplitude: Mat3, profile: RadialProfile) -> Self {
        RadialTerm { amplitude, profile, center: Point::zeros() }
    }

    pub fn centered(mut self, center: Point) -> Self {
        self.center = center;
        self
    }
}

/// A matrix-valued coefficient `x ↦ T(x)`.
///
/// Closed-form fields are `base + Σ amplitudeₖ pₖ(|x − cₖ|)`; grid fields are
/// trilinear interpolants of sampled tensors and equal `outside` off the grid.
#[derive(Clone, Debug)]
pub enum TensorField {
    Analytic { base: Mat3, terms: Vec<RadialTerm> },
    Grid(Arc<GridTensor>),
}

impl TensorField {
    pub fn constant(value: Mat3) -> Self {
        TensorField::Analytic { base: value, terms: Vec::new() }
    }

    pub fn scalar(value: f64) -> Self {
        Self::constant(Mat3::identity() * value)
    }

    pub fn radial(base: Mat3, terms: Vec<RadialTerm>) -> Self {
        TensorField::Analytic { base, terms }
    }

    pub fn grid(grid: GridTensor) -> Self {
        TensorField::Grid(Arc::new(grid))
    }

    /// Adds a radial term; grid fields are left untouched and `None` is returned.
    pub fn with_term(self, term: RadialTerm) -> Option<Self> {
        match self {
            TensorField::Analytic { base, mut terms } => {
                terms.push(term);
                Some(TensorField::Analytic { base, terms })
            }
            TensorField::Grid(_) => None,
        }
    }

    pub fn eval(&self, x: &Point) -> Mat3 {
        match self {
            TensorField::Analytic { base, terms } => {
                let mut out = *base;
                for t in terms {
                    let d = (x - t.center).norm();
                    let w = t.profile.eval(d);
                    if w != 0.0 {
                        out += t.amplitude * w;
                    }
                }
                out
            }
            TensorField::Grid(g) => g.eval(x),
        }
    }

    pub(crate) fn check(&self) -> Result<(), String> {
        match self {
            TensorField::Analytic { base, terms } => {
                if !base.iter().all(|v| v.is_finite()) {
                    return Err("non-finite base tensor".into());
                }
                terms.iter().try_for_each(|t| t.profile.check())
            }
            TensorField::Grid(_) => Ok(()),
        }
    }

    /// True when the field does not depend on the point.
    pub fn is_constant(&self) -> bool {
        matches!(self, TensorField::Analytic { terms, .. } if terms.is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_endpoints() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep_d1(0.0), 0.0);
        assert_eq!(smoothstep_d1(1.0), 0.0);
        assert_eq!(smoothstep_d2(0.0), 0.0);
        assert_eq!(smoothstep_d2(1.0), 0.0);
        // derivative against a central difference
        let h = 1e-6;
        for &s in &[0.2, 0.5, 0.77] {
            let fd = (smoothstep(s + h) - smoothstep(s - h)) / (2.0 * h);
            assert!((fd - smoothstep_d1(s)).abs() < 1e-8);
            let fd2 = (smoothstep_d1(s + h) - smoothstep_d1(s - h)) / (2.0 * h);
            assert!((fd2 - smoothstep_d2(s)).abs() < 1e-6);
        }
    }

    #[test]
    fn bump_profile_has_compact_support() {
        let p = RadialProfile::Bump { radius: 2.0 };
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(2.0), 0.0);
        assert_eq!(p.eval(5.0), 0.0);
        assert_eq!(p.support_radius(), Some(2.0));
    }

    #[test]
    fn analytic_field_sums_terms() {
        let f = TensorField::radial(
            Mat3::identity(),
            vec![RadialTerm::new(Mat3::identity() * 0.5, RadialProfile::Gaussian { width: 1.0 })],
        );
        let x = Point::new(1.0, 0.0, 0.0);
        let v = f.eval(&x);
        assert!((v[(0, 0)] - (1.0 + 0.5 * (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(v[(0, 1)], 0.0);
    }
}
