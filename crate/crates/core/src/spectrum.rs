//! The essential spectrum of the variable-coefficient pencil as the union of
//! the divergence-form part and the constant-coefficient part at infinity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coefficients::{validate, AtInfinity, CoefficientError, CoefficientField, ValidationReport};
use crate::divform::{divform_essential_spectrum, DivformError};
use crate::sampling::test_directions;
use crate::symbol::{essential_spectrum_constant, Component, SpectrumSet, SymbolError};
use crate::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    FullSpace,
    /// `x₃ > 0`
    HalfSpace,
    /// `0 < x₃ < L`
    Slab {
        #[serde(rename = "L")]
        l: f64,
    },
    /// `0 < x₂ < L₁, 0 < x₃ < L₂`
    Cylinder {
        #[serde(rename = "L")]
        l: [f64; 2],
    },
    /// `0 < xᵢ < Lᵢ`
    BoundedBox {
        #[serde(rename = "L")]
        l: [f64; 3],
    },
}

impl DomainSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            DomainSpec::FullSpace => "full-space",
            DomainSpec::HalfSpace => "half-space",
            DomainSpec::Slab { .. } => "slab",
            DomainSpec::Cylinder { .. } => "cylinder",
            DomainSpec::BoundedBox { .. } => "bounded-box",
        }
    }

    pub fn from_kind(kind: &str, lengths: &[f64]) -> Result<Self, SymbolError> {
        let d = match (kind, lengths) {
            ("full-space", []) => DomainSpec::FullSpace,
            ("half-space", []) => DomainSpec::HalfSpace,
            ("slab", [l]) => DomainSpec::Slab { l: *l },
            ("cylinder", [a, b]) => DomainSpec::Cylinder { l: [*a, *b] },
            ("bounded-box", [a, b, c]) => DomainSpec::BoundedBox { l: [*a, *b, *c] },
            ("full-space" | "half-space" | "slab" | "cylinder" | "bounded-box", _) => {
                return Err(SymbolError::InvalidInput(format!("domain `{kind}` got {} lengths", lengths.len())))
            }
            _ => return Err(SymbolError::UnsupportedDomain(kind.to_string())),
        };
        d.check().map_err(SymbolError::InvalidInput)?;
        Ok(d)
    }

    /// All lengths positive and finite; the message names the field.
    pub fn check(&self) -> Result<(), String> {
        let lengths: &[f64] = match self {
            DomainSpec::FullSpace | DomainSpec::HalfSpace => &[],
            DomainSpec::Slab { l } => std::slice::from_ref(l),
            DomainSpec::Cylinder { l } => l,
            DomainSpec::BoundedBox { l } => l,
        };
        for (i, &v) in lengths.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                let field = if lengths.len() == 1 { "L".to_string() } else { format!("L[{i}]") };
                return Err(format!("domain.{field} must be positive and finite, got {v}"));
            }
        }
        Ok(())
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, DomainSpec::BoundedBox { .. })
    }

    /// Open-domain membership.
    pub fn contains(&self, x: &Point) -> bool {
        match self {
            DomainSpec::FullSpace => true,
            DomainSpec::HalfSpace => x.z > 0.0,
            DomainSpec::Slab { l } => x.z > 0.0 && x.z < *l,
            DomainSpec::Cylinder { l } => x.y > 0.0 && x.y < l[0] && x.z > 0.0 && x.z < l[1],
            DomainSpec::BoundedBox { l } => (0..3).all(|i| x[i] > 0.0 && x[i] < l[i]),
        }
    }

    /// Interior sample points: Halton points in the domain clipped to `[-extent, extent]` on unbounded axes.
    pub fn interior_samples(&self, n: usize, extent: f64) -> Vec<Point> {
        let e = extent;
        let (lo, hi) = match self {
            DomainSpec::FullSpace => (Point::new(-e, -e, -e), Point::new(e, e, e)),
            DomainSpec::HalfSpace => (Point::new(-e, -e, 0.0), Point::new(e, e, e)),
            DomainSpec::Slab { l } => (Point::new(-e, -e, 0.0), Point::new(e, e, *l)),
            DomainSpec::Cylinder { l } => (Point::new(-e, 0.0, 0.0), Point::new(e, l[0], l[1])),
            DomainSpec::BoundedBox { l } => (Point::zeros(), Point::new(l[0], l[1], l[2])),
        };
        crate::sampling::halton_box(n, lo, hi).into_iter().filter(|x| self.contains(x)).collect()
    }
}

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("coefficients violate the standing hypotheses at {count} sampled (point, direction) pairs")]
    HypothesisViolated { count: usize, report: Box<ValidationReport> },
    #[error("bounded domains require the values at infinity (1, 1, 0), got {0:?}")]
    BoundedConvention(AtInfinity),
    #[error("sample point ({}, {}, {}) lies outside the {kind} domain", at.x, at.y, at.z)]
    SampleOutsideDomain { kind: &'static str, at: Point },
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
    #[error(transparent)]
    Divform(#[from] DivformError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// Union of the divergence-form spectrum of `field` and the constant-coefficient spectrum on `domain`.
pub fn maxwell_essential_spectrum(field: &CoefficientField, domain: &DomainSpec, samples: &[Point], tol: f64) -> Result<SpectrumSet, SpectrumError> {
    domain.check().map_err(SymbolError::InvalidInput)?;
    if domain.is_bounded() && field.at_infinity != AtInfinity::BOUNDED {
        return Err(SpectrumError::BoundedConvention(field.at_infinity));
    }
    if let Some(x) = samples.iter().find(|x| !domain.contains(x)) {
        return Err(SpectrumError::SampleOutsideDomain { kind: domain.kind(), at: *x });
    }
    if !samples.is_empty() {
        let report = validate(field, samples, &test_directions(8, 0))?;
        if !report.passed() {
            return Err(SpectrumError::HypothesisViolated { count: report.violations.len() + report.asymmetries.len(), report: Box::new(report) });
        }
    }
    let div = divform_essential_spectrum(field, samples, tol, !domain.is_bounded())?;
    let inf = field.at_infinity;
    let mut constant = essential_spectrum_constant(domain, inf.eps0, inf.mu0, inf.sigma0)?;
    constant.tolerance = tol;
    Ok(union(&div, &constant, tol))
}

/// Concatenation with points absorbed by other components dropped, and repeated components removed.
pub fn union(a: &SpectrumSet, b: &SpectrumSet, tol: f64) -> SpectrumSet {
    let all: Vec<_> = a.components.iter().chain(&b.components).cloned().collect();
    let mut out = SpectrumSet::new(tol);
    for (i, c) in all.iter().enumerate() {
        let duplicate = all[..i].iter().any(|p| same_component(&p.component, &c.component, tol));
        let absorbed = match c.component {
            Component::Point { re, im } => {
                let z = Complex64::new(re, im);
                all.iter().enumerate().any(|(j, o)| j != i && !matches!(o.component, Component::Point { .. }) && o.component.contains(z, tol))
            }
            _ => false,
        };
        if !duplicate && !absorbed {
            out.components.push(c.clone());
        }
    }
    out
}

fn same_component(a: &Component, b: &Component, tol: f64) -> bool {
    let close = |x: f64, y: f64| x == y || (x - y).abs() <= tol;
    match (a, b) {
        (Component::Point { re: r1, im: i1 }, Component::Point { re: r2, im: i2 }) => (Complex64::new(*r1, *i1) - Complex64::new(*r2, *i2)).norm() <= tol,
        (Component::RealSegment { a: a1, b: b1 }, Component::RealSegment { a: a2, b: b2 }) => close(*a1, *a2) && close(*b1, *b2),
        (Component::ImagSegment { a: a1, b: b1 }, Component::ImagSegment { a: a2, b: b2 }) => close(*a1, *a2) && close(*b1, *b2),
        (x @ Component::KappaCurve { .. }, y @ Component::KappaCurve { .. }) => x == y,
        _ => false,
    }
}

/// Both `0` and `−iσ₀/ε₀` are members.
pub fn contains_distinguished_points(set: &SpectrumSet, eps0: f64, sigma0: f64) -> bool {
    set.contains(Complex64::new(0.0, 0.0)) && set.contains(Complex64::new(0.0, -sigma0 / eps0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{RadialProfile, RadialTerm, TensorField};
    use crate::symbol::{Provenance, DEFAULT_TOLERANCE};
    use crate::{Mat3, Vector3};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian_sigma() -> TensorField {
        TensorField::radial(Mat3::zeros(), vec![RadialTerm::new(Mat3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0)), RadialProfile::Gaussian { width: 1.0 })])
    }

    #[test]
    fn domain_json_shape() {
        let d: DomainSpec = serde_json::from_str(r#"{"kind":"cylinder","L":[1.0,2.0]}"#).unwrap();
        assert_eq!(d, DomainSpec::Cylinder { l: [1.0, 2.0] });
        assert!(serde_json::from_str::<DomainSpec>(r#"{"kind":"torus"}"#).is_err());
        assert!(serde_json::from_str::<DomainSpec>(r#"{"kind":"slab","L":1.0,"extra":2}"#).is_err());
        let err = DomainSpec::Slab { l: -1.0 }.check().unwrap_err();
        assert!(err.contains("domain.L"));
        assert!(matches!(DomainSpec::from_kind("annulus", &[]), Err(SymbolError::UnsupportedDomain(_))));
    }

    #[test]
    fn full_space_lossless_is_the_real_line() {
        let f = CoefficientField::isotropic(1.0, 1.0, 0.0).unwrap();
        let s = maxwell_essential_spectrum(&f, &DomainSpec::FullSpace, &DomainSpec::FullSpace.interior_samples(100, 3.0), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(s.components.len(), 1);
        assert!(matches!(s.components[0].component, Component::RealSegment { a, b } if a == f64::NEG_INFINITY && b == f64::INFINITY));
    }

    #[test]
    fn bounded_box_with_conductivity_range() {
        let l = [2.0, 2.0, 2.0];
        let sigma = TensorField::radial(Mat3::identity(), vec![RadialTerm::new(Mat3::identity() * 2.0, RadialProfile::Distance)]);
        let f = CoefficientField::bounded(TensorField::scalar(1.0), TensorField::scalar(1.0), sigma, 10.0).unwrap();
        // s = 1 + 2|x| on the ray towards (1, 0.5, 0.5)·t stays in [1, 5]
        let dir = Point::new(1.0, 0.5, 0.5).normalize();
        let samples: Vec<Point> = (1..200).map(|i| dir * (2.0 * i as f64 / 200.0)).filter(|x| DomainSpec::BoundedBox { l }.contains(x)).collect();
        let s = maxwell_essential_spectrum(&f, &DomainSpec::BoundedBox { l }, &samples, DEFAULT_TOLERANCE).unwrap();
        assert!(s.contains(c(0.0, 0.0)));
        assert!(s.contains(c(0.0, -1.5)));
        assert!(!s.contains(c(0.0, -0.5)));
        assert!(contains_distinguished_points(&s, 1.0, 0.0));
    }

    #[test]
    fn bounded_box_requires_convention() {
        let f = CoefficientField::isotropic(2.0, 1.0, 0.0).unwrap();
        let err = maxwell_essential_spectrum(&f, &DomainSpec::BoundedBox { l: [1.0; 3] }, &[Point::new(0.5, 0.5, 0.5)], 1e-9);
        assert!(matches!(err, Err(SpectrumError::BoundedConvention(_))));
    }

    #[test]
    fn cylinder_union() {
        let pi = std::f64::consts::PI;
        let d = DomainSpec::Cylinder { l: [pi, pi] };
        let f = CoefficientField::new(TensorField::scalar(1.0), TensorField::scalar(1.0), gaussian_sigma(), 10.0, AtInfinity::BOUNDED).unwrap();
        let mut samples = d.interior_samples(2000, 6.0);
        samples.push(Point::new(0.0, 1e-4, 1e-4));
        let s = maxwell_essential_spectrum(&f, &d, &samples, DEFAULT_TOLERANCE).unwrap();
        for w in [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(7.0, 0.0), c(0.0, -2.9), c(0.0, -1.0)] {
            assert!(s.contains(w), "{w}");
        }
        for w in [c(0.5, 0.0), c(-0.5, 0.0), c(0.0, -3.1), c(0.0, 0.1)] {
            assert!(!s.contains(w), "{w}");
        }
        assert!(s.components_from(Provenance::Divform).count() == 1);
    }

    #[test]
    fn lossy_limit_contains_both_points() {
        let f = CoefficientField::isotropic(1.0, 1.0, 2.0).unwrap();
        for d in [DomainSpec::FullSpace, DomainSpec::HalfSpace, DomainSpec::Slab { l: 1.0 }, DomainSpec::Cylinder { l: [1.0, 1.5] }] {
            let s = maxwell_essential_spectrum(&f, &d, &d.interior_samples(50, 2.0), 1e-9).unwrap();
            assert!(contains_distinguished_points(&s, 1.0, 2.0), "{d:?}");
            assert!(s.contains(c(0.0, -2.0)));
        }
    }

    #[test]
    fn union_contains_both_constituents() {
        let f = CoefficientField::new(TensorField::scalar(1.5), TensorField::scalar(1.0), gaussian_sigma(), 10.0, AtInfinity::new(1.5, 1.0, 0.0).unwrap()).unwrap();
        let d = DomainSpec::Slab { l: 2.0 };
        let samples = d.interior_samples(500, 4.0);
        let s = maxwell_essential_spectrum(&f, &d, &samples, 1e-9).unwrap();
        let div = divform_essential_spectrum(&f, &samples, 1e-9, true).unwrap();
        let cst = essential_spectrum_constant(&d, 1.5, 1.0, 0.0).unwrap();
        for w in div.sample(50, 20.0).into_iter().chain(cst.sample(50, 20.0)) {
            assert!(s.contains(w), "{w}");
        }
    }

    #[test]
    fn compact_changes_leave_constant_part_identical() {
        let d = DomainSpec::Cylinder { l: [1.0, 2.0] };
        let a = CoefficientField::isotropic(2.0, 0.5, 0.3).unwrap();
        let mut b = a.clone();
        b.eps = b.eps.with_term(RadialTerm::new(Mat3::identity() * 0.2, RadialProfile::Bump { radius: 1.0 })).unwrap();
        b.lambda = 4.0;
        let samples = d.interior_samples(100, 3.0);
        let sa = maxwell_essential_spectrum(&a, &d, &samples, 1e-9).unwrap();
        let sb = maxwell_essential_spectrum(&b, &d, &samples, 1e-9).unwrap();
        let ca: Vec<_> = sa.components_from(Provenance::ConstantPencil).collect();
        let cb: Vec<_> = sb.components_from(Provenance::ConstantPencil).collect();
        assert_eq!(ca, cb);
    }

    #[test]
    fn samples_outside_domain_are_rejected() {
        let f = CoefficientField::isotropic(1.0, 1.0, 0.0).unwrap();
        let r = maxwell_essential_spectrum(&f, &DomainSpec::HalfSpace, &[Point::new(0.0, 0.0, -1.0)], 1e-9);
        assert!(matches!(r, Err(SpectrumError::SampleOutsideDomain { .. })));
    }
}
