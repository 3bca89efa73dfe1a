//! Essential spectrum of the anisotropic Maxwell operator pencil
//!
//! ```text
//! V_ω(E, H) = (curl H + i(ωε + iσ)E, curl E − iωμH),   ν × E = 0 on ∂Ω
//! ```
//!
//! on full space, half space, slabs, rectangular cylinders and bounded boxes.
//! The essential spectrum splits into the spectrum of the divergence-form pencil
//! `div((ωε + iσ)∇·)` and that of the pencil with the constant coefficients
//! `(ε₀, μ₀, σ₀)` reached at infinity. The crate computes both parts and
//! cross-checks them:
//!
//! * [`coefficients`]: material tensors, ellipticity checks, constant/compact/small split.
//! * [`symbol`]: Fourier symbol `A_ω(ξ)`, `k_ω`, constant-coefficient spectra, [`SpectrumSet`].
//! * [`divform`]: pointwise indefiniteness of `νε + σ`.
//! * [`spectrum`]: union of the two parts on a [`DomainSpec`].
//! * [`helmholtz`]: sine/cosine/Fourier vector potentials and Helmholtz projections.
//! * [`weyl`]: Weyl singular sequences and their H⁻¹ decay.
//! * [`oracle`]: Yee-grid discretisation and minimal singular value sweeps.

pub mod coefficients;
pub mod divform;
pub mod helmholtz;
pub mod linalg;
pub mod oracle;
pub mod sampling;
pub mod spectrum;
pub mod symbol;
pub mod weyl;

pub use coefficients::{AtInfinity, CoefficientField, CoefficientSplit, TensorField};
pub use spectrum::DomainSpec;
pub use symbol::{PencilSymbol, SpectrumSet};

pub use nalgebra::{Matrix3, Vector3};
pub use num_complex::Complex64;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Real symmetric 3×3 tensor.
pub type Mat3 = nalgebra::Matrix3<f64>;
/// Point or direction in ℝ³.
pub type Point = nalgebra::Vector3<f64>;
