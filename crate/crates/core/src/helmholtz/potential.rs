//! Divergence-free vector potentials `curl ψ = f`, solved one axial mode at a time.
//!
//! For the axial frequency `ξ ≠ 0`:
//!
//! ```text
//! (−Δ′ + ξ²) ψ̂₁ = ∂₂f̂₃ − ∂₃f̂₂
//! ψ̂₂ = −i(∂₂ψ̂₁ + f̂₃)/ξ,   ψ̂₃ = i(f̂₂ − ∂₃ψ̂₁)/ξ
//! ```
//!
//! With `ψ × ν = 0` the scalar `ψ₁` is a Dirichlet (sine) series; with `ψ · ν = 0`
//! it is a Neumann (cosine) series. At `ξ = 0` the cross-section system
//! `curl′ψ′ = f̂₁, div′ψ′ = 0` is solved with a stream function `ψ′ = (∂₃s, −∂₂s)`,
//! `−Δ′s = f̂₁`.

use ndarray::{Array2, Axis as NdAxis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::project::{helmholtz_project, ProjectionVariant};
use super::{cross_derivative, cross_inner, Axis, Basis, HelmholtzError, Parity, SpectralField, I, ZERO};

/// Relative divergence accepted as solenoidal.
pub const SOLENOIDAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    /// `ψ × ν = 0`, for `f · ν = 0`.
    TangentialZero,
    /// `ψ · ν = 0`.
    NormalZero,
}

impl BoundaryCondition {
    pub fn f_parity(self) -> Parity {
        match self {
            BoundaryCondition::TangentialZero => Parity::Magnetic,
            BoundaryCondition::NormalZero => Parity::Electric,
        }
    }

    pub fn psi_parity(self) -> Parity {
        self.f_parity().dual()
    }
}

/// One axial mode of a scalar on the cross-section (axes 2 and 3).
#[derive(Clone, Debug, PartialEq)]
pub struct CrossSection {
    pub xi: f64,
    pub bases: [Basis; 2],
    pub data: Array2<Complex64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroModePolicy {
    pub method: &'static str,
    pub axial_zero_modes: usize,
    /// Coefficient mass removed from zero-wavenumber modes before solving (T operators only).
    pub harmonic_removed: f64,
}

#[derive(Clone, Debug)]
pub struct PotentialResult {
    pub psi: SpectralField,
    pub bc: BoundaryCondition,
    pub residual_curl: f64,
    pub residual_div: f64,
    pub boundary_residual: f64,
    /// Max-norm of the data the residuals are measured against.
    pub f_norm: f64,
    pub zero_mode_policy: ZeroModePolicy,
}

#[derive(Serialize)]
struct PotentialSummary<'a> {
    bc: BoundaryCondition,
    residual_curl: f64,
    residual_div: f64,
    boundary_residual: f64,
    f_norm: f64,
    psi_l2_norm: f64,
    zero_mode_policy: &'a ZeroModePolicy,
}

impl PotentialResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PotentialSummary {
            bc: self.bc,
            residual_curl: self.residual_curl,
            residual_div: self.residual_div,
            boundary_residual: self.boundary_residual,
            f_norm: self.f_norm,
            psi_l2_norm: self.psi.l2_norm(),
            zero_mode_policy: &self.zero_mode_policy,
        })
        .expect("summary serializes")
    }

    pub fn max_relative_residual(&self) -> f64 {
        let scale = if self.f_norm > 0.0 { self.f_norm } else { 1.0 };
        self.residual_curl.max(self.residual_div).max(self.boundary_residual) / scale
    }
}

fn cross_axes(f: &SpectralField) -> [Axis; 2] {
    [f.grid.axes[1], f.grid.axes[2]]
}

fn cross_bases(f: &SpectralField, parity: Parity, c: usize) -> [Basis; 2] {
    let b = f.grid.component_bases(parity, c);
    [b[1], b[2]]
}

fn slice(f: &SpectralField, c: usize, j1: usize) -> Array2<Complex64> {
    f.comps[c].index_axis(NdAxis(0), j1).to_owned()
}

/// Divides by `ξ² + k₂² + k₃²`, leaving the zero eigenmode at zero.
fn inverse_shifted_laplacian(rhs: &mut Array2<Complex64>, axes: [Axis; 2], xi: f64) {
    for ((j2, j3), v) in rhs.indexed_iter_mut() {
        let lam = xi * xi + axes[0].wavenumber(j2).powi(2) + axes[1].wavenumber(j3).powi(2);
        *v = if lam > 0.0 { *v / lam } else { ZERO };
    }
}

fn psi1_mode(f: &SpectralField, j1: usize) -> CrossSection {
    let axes = cross_axes(f);
    let xi = f.grid.axes[0].wavenumber(j1);
    let (d2f3, b) = cross_derivative(&slice(f, 2, j1), cross_bases(f, f.parity, 2), axes, 0);
    let (d3f2, _) = cross_derivative(&slice(f, 1, j1), cross_bases(f, f.parity, 1), axes, 1);
    let mut data = d2f3 - d3f2;
    inverse_shifted_laplacian(&mut data, axes, xi);
    debug_assert_eq!(b, cross_bases(f, f.parity.dual(), 0));
    CrossSection { xi, bases: b, data }
}

fn require(f: &SpectralField, parity: Parity) -> Result<(), HelmholtzError> {
    if f.parity != parity {
        return Err(HelmholtzError::WrongParity { expected: parity, got: f.parity });
    }
    Ok(())
}

/// `ψ̂₁` for `ψ × ν = 0`: a sine series vanishing on the cross-section boundary.
pub fn solve_psi1_dirichlet(f: &SpectralField, axial_index: usize) -> Result<CrossSection, HelmholtzError> {
    require(f, BoundaryCondition::TangentialZero.f_parity())?;
    Ok(psi1_mode(f, axial_index))
}

/// `ψ̂₁` for `ψ · ν = 0`: a cosine series with `−∇′ψ̂₁·ν′ = (f̂₃, −f̂₂)·ν′`; its mean is zero.
pub fn solve_psi1_neumann(f: &SpectralField, axial_index: usize) -> Result<CrossSection, HelmholtzError> {
    require(f, BoundaryCondition::NormalZero.f_parity())?;
    Ok(psi1_mode(f, axial_index))
}

/// `(ψ̂₂, ψ̂₃)` from `ψ̂₁` and `f` at a nonzero axial frequency.
pub fn recover_tangential(psi1: &CrossSection, f: &SpectralField, axial_index: usize) -> Result<(CrossSection, CrossSection), HelmholtzError> {
    let xi = f.grid.axes[0].wavenumber(axial_index);
    if xi == 0.0 {
        return Err(HelmholtzError::ZeroModeDeferred);
    }
    let axes = cross_axes(f);
    let (d2, b2) = cross_derivative(&psi1.data, psi1.bases, axes, 0);
    let (d3, b3) = cross_derivative(&psi1.data, psi1.bases, axes, 1);
    let f2 = slice(f, 1, axial_index);
    let f3 = slice(f, 2, axial_index);
    let psi2 = (d2 + f3).mapv(|v| -I * v / xi);
    let psi3 = (f2 - d3).mapv(|v| I * v / xi);
    Ok((CrossSection { xi, bases: b2, data: psi2 }, CrossSection { xi, bases: b3, data: psi3 }))
}

/// `ψ′ = (∂₃s, −∂₂s)` with `−Δ′s = f̂₁`, `s` in the bases of `f₁`.
fn zero_mode_tangential(f: &SpectralField, axial_index: usize) -> (Array2<Complex64>, Array2<Complex64>) {
    let axes = cross_axes(f);
    let mut s = slice(f, 0, axial_index);
    inverse_shifted_laplacian(&mut s, axes, 0.0);
    let sb = cross_bases(f, f.parity, 0);
    let (d3s, _) = cross_derivative(&s, sb, axes, 1);
    let (d2s, _) = cross_derivative(&s, sb, axes, 0);
    (d3s, d2s.mapv(|v| -v))
}

fn check_input(f: &SpectralField, reference: f64) -> Result<(), HelmholtzError> {
    let scale = reference * f.grid.max_wavenumber().max(1.0);
    let div = f.div().max_norm();
    if div > SOLENOIDAL_TOL * scale {
        return Err(HelmholtzError::NotSolenoidal { div_norm: div, relative: div / scale });
    }
    let h = f.harmonic_content();
    if h > SOLENOIDAL_TOL * reference {
        return Err(HelmholtzError::NonzeroHarmonic { norm: h });
    }
    Ok(())
}

fn solve(f: &SpectralField, bc: BoundaryCondition, reference: f64, harmonic_removed: f64) -> Result<PotentialResult, HelmholtzError> {
    require(f, bc.f_parity())?;
    check_input(f, reference)?;
    let n1 = f.grid.shape()[0];
    let modes: Vec<[Array2<Complex64>; 3]> = (0..n1)
        .into_par_iter()
        .map(|j1| {
            let psi1 = psi1_mode(f, j1);
            match recover_tangential(&psi1, f, j1) {
                Ok((p2, p3)) => [psi1.data, p2.data, p3.data],
                Err(_) => {
                    let (p2, p3) = zero_mode_tangential(f, j1);
                    [psi1.data, p2, p3]
                }
            }
        })
        .collect();
    let mut psi = SpectralField::zeros(&f.grid, bc.psi_parity());
    for (j1, m) in modes.into_iter().enumerate() {
        for c in 0..3 {
            psi.comps[c].index_axis_mut(NdAxis(0), j1).assign(&m[c]);
        }
    }
    let axial_zero_modes = (0..n1).filter(|&j| f.grid.axes[0].wavenumber(j) == 0.0).count();
    Ok(PotentialResult {
        residual_curl: psi.curl().sub(f).max_norm(),
        residual_div: psi.div().max_norm(),
        boundary_residual: psi.boundary_residual(),
        f_norm: reference,
        bc,
        psi,
        zero_mode_policy: ZeroModePolicy { method: "cross-section stream function", axial_zero_modes, harmonic_removed },
    })
}

/// `ψ` with `curl ψ = f`, `div ψ = 0` and the boundary condition `bc`.
pub fn vector_potential(f: &SpectralField, bc: BoundaryCondition) -> Result<PotentialResult, HelmholtzError> {
    solve(f, bc, f.max_norm(), 0.0)
}

fn t_operator(u: &SpectralField, variant: ProjectionVariant, bc: BoundaryCondition) -> Result<PotentialResult, HelmholtzError> {
    let mut sol = helmholtz_project(u, variant)?.solenoidal;
    let harmonic = sol.harmonic_content();
    sol.remove_harmonic();
    solve(&sol, bc, u.max_norm(), harmonic)
}

/// `T_N u`: potential with `ψ × ν = 0` of the solenoidal part of `u` (magnetic parity).
pub fn t_n(u: &SpectralField) -> Result<PotentialResult, HelmholtzError> {
    t_operator(u, ProjectionVariant::Full, BoundaryCondition::TangentialZero)
}

/// `T_T u`: potential with `ψ · ν = 0` of the solenoidal part of `u` (electric parity).
pub fn t_t(u: &SpectralField) -> Result<PotentialResult, HelmholtzError> {
    t_operator(u, ProjectionVariant::Dirichlet, BoundaryCondition::NormalZero)
}

/// `ψ̂_ε = |ξ|/(|ξ| + ε) ψ̂` on nonzero axial modes; the `ξ = 0` mode, solved
/// directly, is left as is.
pub fn regularize(psi: &SpectralField, eps: f64) -> SpectralField {
    let mut out = psi.clone();
    let axis = psi.grid.axes[0];
    for c in 0..3 {
        for (j1, mut lane) in out.comps[c].axis_iter_mut(NdAxis(0)).enumerate() {
            let xi = axis.wavenumber(j1).abs();
            if xi > 0.0 {
                let s = xi / (xi + eps);
                lane.mapv_inplace(|v| v * s);
            }
        }
    }
    out
}

/// `(Σ_{c,a} ‖∂_a u_c‖²)^{1/2}`
pub fn h1_seminorm(u: &SpectralField) -> f64 {
    let mut acc = 0.0;
    for c in 0..3 {
        for a in 0..3 {
            let (d, b) = super::differentiate(&u.comps[c], &u.bases(c), &u.grid.axes, a);
            acc += super::inner(&d, &d, &b, &u.grid.axes).re;
        }
    }
    acc.sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeViolation {
    pub axial_index: usize,
    pub xi: f64,
    pub grad_psi1: f64,
    pub xi_psi1: f64,
    pub f_prime: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AprioriReport {
    pub modes_checked: usize,
    pub slack: f64,
    pub violations: Vec<ModeViolation>,
}

impl AprioriReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `‖∇′ψ̂₁(ξ)‖ ≤ ‖f̂′(ξ)‖` and `|ξ|‖ψ̂₁(ξ)‖ ≤ ‖f̂′(ξ)‖` on every axial mode.
pub fn apriori_bounds_check(f: &SpectralField, result: &PotentialResult) -> AprioriReport {
    let psi = &result.psi;
    let axes = cross_axes(f);
    let norm = |d: &Array2<Complex64>, b: [Basis; 2]| cross_inner(d, d, b, axes).re.max(0.0).sqrt();
    let b1 = cross_bases(psi, psi.parity, 0);
    let slack = 1e-10 * f.l2_norm().max(f64::MIN_POSITIVE);
    let n1 = f.grid.shape()[0];
    let mut violations = Vec::new();
    for j1 in 0..n1 {
        let xi = f.grid.axes[0].wavenumber(j1);
        let p1 = slice(psi, 0, j1);
        let (d2, db2) = cross_derivative(&p1, b1, axes, 0);
        let (d3, db3) = cross_derivative(&p1, b1, axes, 1);
        let grad = (norm(&d2, db2).powi(2) + norm(&d3, db3).powi(2)).sqrt();
        let xi_psi = xi.abs() * norm(&p1, b1);
        let fp = (norm(&slice(f, 1, j1), cross_bases(f, f.parity, 1)).powi(2) + norm(&slice(f, 2, j1), cross_bases(f, f.parity, 2)).powi(2)).sqrt();
        if grad > fp + slack || xi_psi > fp + slack {
            violations.push(ModeViolation { axial_index: j1, xi, grad_psi1: grad, xi_psi1: xi_psi, f_prime: fp });
        }
    }
    AprioriReport { modes_checked: n1, slack, violations }
}

/// Field whose axial modes are all zero except `j1`, for single-mode tests.
#[cfg(test)]
fn keep_axial_mode(f: &SpectralField, j1: usize) -> SpectralField {
    let mut out = f.clone();
    for c in 0..3 {
        for (j, mut lane) in out.comps[c].axis_iter_mut(NdAxis(0)).enumerate() {
            if j != j1 {
                lane.fill(ZERO);
            }
        }
    }
    out
}
