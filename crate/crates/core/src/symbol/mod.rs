//! Fourier symbol of the constant-coefficient pencil and its essential spectrum.
//!
//! In the Fourier domain `curl` acts as `iC(ξ)` with `C(ξ)v = ξ × v`, and the
//! pencil with coefficients `(ε₀, μ₀, σ₀)` becomes the 6×6 matrix
//!
//! ```text
//! A_ω(ξ) = ⎡ i(ωε₀ + iσ₀) I   iC(ξ)    ⎤      det A_ω(ξ) = k_ω (|ξ|² − k_ω)²
//!          ⎣ iC(ξ)            −iωμ₀ I  ⎦      k_ω = ωμ₀(ωε₀ + iσ₀)
//! ```

mod set;

use nalgebra::{Matrix3, SMatrix};
use num_complex::Complex64;
use thiserror::Error;

pub use set::{membership, Component, LabeledComponent, Provenance, SpectrumSet, DEFAULT_TOLERANCE};

use crate::spectrum::DomainSpec;
use crate::{Mat3, Point};

pub type Matrix6 = SMatrix<Complex64, 6, 6>;
pub type CMat3 = Matrix3<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error)]
pub enum SymbolError {
    #[error("unsupported domain kind `{0}`")]
    UnsupportedDomain(String),
    #[error("invalid symbol input: {0}")]
    InvalidInput(String),
}

/// `C(ξ)` with `C(ξ)v = ξ × v`.
pub fn curl_symbol(xi: &Point) -> Mat3 {
    Mat3::new(0.0, -xi.z, xi.y, xi.z, 0.0, -xi.x, -xi.y, xi.x, 0.0)
}

/// The same matrix for complex arguments, e.g. `C(iξ, πn₁/L₁, πn₂/L₂)`.
pub fn curl_symbol_complex(a: Complex64, b: Complex64, c: Complex64) -> CMat3 {
    let z = Complex64::new(0.0, 0.0);
    CMat3::new(z, -c, b, c, z, -a, -b, a, z)
}

pub fn kappa(omega: Complex64, eps0: f64, mu0: f64, sigma0: f64) -> Complex64 {
    omega * mu0 * (omega * eps0 + I * sigma0)
}

#[derive(Clone, Debug)]
pub struct PencilSymbol {
    pub omega: Complex64,
    /// Frequency vector; for the cylinder `(ξ, πn₁/L₁, πn₂/L₂)`.
    pub xi: Point,
    pub matrix: Matrix6,
    pub kappa: Complex64,
}

impl PencilSymbol {
    pub fn determinant(&self) -> Complex64 {
        self.matrix.lu().determinant()
    }

    /// `k_ω (|ξ|² − k_ω)²`
    pub fn closed_form_determinant(&self) -> Complex64 {
        let d = self.xi.norm_squared() - self.kappa;
        self.kappa * d * d
    }

    pub fn block(&self, row: usize, col: usize) -> CMat3 {
        self.matrix.fixed_view::<3, 3>(3 * row, 3 * col).into_owned()
    }
}

fn assemble(omega: Complex64, eps0: f64, mu0: f64, sigma0: f64, upper: CMat3, lower: CMat3) -> Matrix6 {
    let a = I * (omega * eps0 + I * sigma0);
    let b = -I * omega * mu0;
    let mut m = Matrix6::zeros();
    for d in 0..3 {
        m[(d, d)] = a;
        m[(d + 3, d + 3)] = b;
    }
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&upper);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&lower);
    m
}

pub fn pencil_symbol(omega: Complex64, xi: &Point, eps0: f64, mu0: f64, sigma0: f64) -> PencilSymbol {
    let c = curl_symbol(xi).map(|v| I * v);
    PencilSymbol { omega, xi: *xi, matrix: assemble(omega, eps0, mu0, sigma0, c, c), kappa: kappa(omega, eps0, mu0, sigma0) }
}

/// Symbol on the cylinder `(0, L₁) × (0, L₂)` in `(x₂, x₃)` for cross-section mode `n` and axial frequency `ξ`.
#[allow(clippy::too_many_arguments)]
pub fn cylinder_symbol(omega: Complex64, n: (u32, u32), xi: f64, l1: f64, l2: f64, eps0: f64, mu0: f64, sigma0: f64) -> PencilSymbol {
    let p = std::f64::consts::PI * n.0 as f64 / l1;
    let q = std::f64::consts::PI * n.1 as f64 / l2;
    let ix = I * xi;
    let upper = curl_symbol_complex(ix, (-p).into(), (-q).into());
    let lower = curl_symbol_complex(ix, p.into(), q.into());
    PencilSymbol {
        omega,
        xi: Point::new(xi, p, q),
        matrix: assemble(omega, eps0, mu0, sigma0, upper, lower),
        kappa: kappa(omega, eps0, mu0, sigma0),
    }
}

/// The kernel vector `(0, ωμ₀L₂, 0, πi, 0, ξL₂)` of the `n = (0, 1)` cylinder symbol.
pub fn cylinder_kernel_vector(omega: Complex64, xi: f64, l2: f64, mu0: f64) -> SMatrix<Complex64, 6, 1> {
    let z = Complex64::new(0.0, 0.0);
    SMatrix::<Complex64, 6, 1>::from_column_slice(&[z, omega * mu0 * l2, z, I * std::f64::consts::PI, z, Complex64::from(xi * l2)])
}

/// Both roots of `k_ω = t`, i.e. of `ε₀μ₀ω² + iσ₀μ₀ω − t = 0`.
pub fn omega_for_kappa(t: Complex64, eps0: f64, mu0: f64, sigma0: f64) -> [Complex64; 2] {
    let a = eps0 * mu0;
    let b = I * sigma0 * mu0;
    let disc = (b * b + 4.0 * a * t).sqrt();
    [(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)]
}

/// Positive edge `π/(L√(ε₀μ₀))` of the cylinder gap, `L = max(L₁, L₂)`.
pub fn cylinder_gap_endpoint(l1: f64, l2: f64, eps0: f64, mu0: f64) -> f64 {
    std::f64::consts::PI / (l1.max(l2) * (eps0 * mu0).sqrt())
}

/// Smallest `|ξ|²` over the cross-section modes admitted by the boundary conditions.
fn threshold(domain: &DomainSpec) -> Option<f64> {
    match domain {
        DomainSpec::FullSpace | DomainSpec::HalfSpace | DomainSpec::Slab { .. } => Some(0.0),
        DomainSpec::Cylinder { l } => {
            let big = l[0].max(l[1]);
            Some(std::f64::consts::PI.powi(2) / (big * big))
        }
        DomainSpec::BoundedBox { .. } => None,
    }
}

/// Essential spectrum of the pencil with constant coefficients on the given domain.
pub fn essential_spectrum_constant(domain: &DomainSpec, eps0: f64, mu0: f64, sigma0: f64) -> Result<SpectrumSet, SymbolError> {
    if !(eps0 > 0.0 && mu0 > 0.0 && sigma0 >= 0.0) {
        return Err(SymbolError::InvalidInput(format!("need eps0 > 0, mu0 > 0, sigma0 >= 0, got ({eps0}, {mu0}, {sigma0})")));
    }
    domain.check().map_err(SymbolError::InvalidInput)?;
    let tag = Some(Provenance::ConstantPencil);
    let mut set = SpectrumSet::new(DEFAULT_TOLERANCE);
    let Some(c) = threshold(domain) else {
        set.push(Component::point(Complex64::new(0.0, 0.0)), tag);
        return Ok(set);
    };
    if sigma0 == 0.0 {
        let e = (c / (eps0 * mu0)).sqrt();
        if e == 0.0 {
            set.push(Component::RealSegment { a: f64::NEG_INFINITY, b: f64::INFINITY }, tag);
        } else {
            set.push(Component::RealSegment { a: f64::NEG_INFINITY, b: -e }, tag);
            set.push(Component::point(Complex64::new(0.0, 0.0)), tag);
            set.push(Component::RealSegment { a: e, b: f64::INFINITY }, tag);
        }
    } else {
        set.push(Component::KappaCurve { eps0, mu0, sigma0, c }, tag);
        if c > 0.0 {
            // k_ω = 0 lies below the threshold and is added separately
            set.push(Component::point(Complex64::new(0.0, 0.0)), tag);
            set.push(Component::point(Complex64::new(0.0, -sigma0 / eps0)), tag);
        }
    }
    Ok(set)
}
