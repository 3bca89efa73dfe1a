//! Spectral vector potentials and Helmholtz projections on slabs, rectangular
//! cylinders and periodic boxes.
//!
//! Fields are stored as mixed Fourier/sine/cosine coefficient arrays. Axis 1 is
//! always periodic (the truncated unbounded direction). Walled axes carry the
//! parity of the boundary condition:
//!
//! * [`Parity::Electric`] (`u × ν = 0`): components tangential to a wall are sine
//!   series across it, the normal component is a cosine series.
//! * [`Parity::Magnetic`] (`u · ν = 0`): the other way round.
//!
//! `curl` maps one parity to the other, and every derivative is a diagonal
//! multiplier between bases, so div, curl and grad are exact on the stored modes.

mod io;
mod potential;
mod project;

use ndarray::{Array, Array2, Array3, Axis as NdAxis, Dimension, IntoDimension, RemoveAxis};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{read_field, write_field, FieldSidecar};
pub use potential::{
    apriori_bounds_check, h1_seminorm, recover_tangential, regularize, solve_psi1_dirichlet, solve_psi1_neumann, t_n, t_t, vector_potential, AprioriReport, BoundaryCondition,
    CrossSection, ModeViolation, PotentialResult, ZeroModePolicy,
};
pub use project::{helmholtz_project, Projection, ProjectionVariant};

use crate::spectrum::DomainSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error)]
pub enum HelmholtzError {
    #[error("input is not solenoidal: max |div f| = {div_norm:.3e} (relative {relative:.3e})")]
    NotSolenoidal { div_norm: f64, relative: f64 },
    #[error("input has content {norm:.3e} in zero-wavenumber modes, which carry harmonic fields of the periodic truncation")]
    NonzeroHarmonic { norm: f64 },
    #[error("axial frequency is zero; the cross-section stream-function solve handles this mode")]
    ZeroModeDeferred,
    #[error("expected a field of {expected:?} parity, got {got:?}")]
    WrongParity { expected: Parity, got: Parity },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field i/o: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// `e^{ikx}`, `k = 2πm/P` in FFT order.
    Exp,
    /// `sin(jπx/L)`, `j = 0..N` (the `j = 0` entry is identically zero).
    Sin,
    /// `cos(jπx/L)`, `j = 0..N`.
    Cos,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Axis {
    Periodic { period: f64, modes: usize },
    Walled { length: f64, modes: usize },
}

impl Axis {
    pub fn modes(&self) -> usize {
        match *self {
            Axis::Periodic { modes, .. } | Axis::Walled { modes, .. } => modes,
        }
    }

    pub fn is_walled(&self) -> bool {
        matches!(self, Axis::Walled { .. })
    }

    pub fn extent(&self) -> f64 {
        match *self {
            Axis::Periodic { period, .. } => period,
            Axis::Walled { length, .. } => length,
        }
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        match *self {
            Axis::Periodic { period, modes } => {
                let m = if j <= (modes - 1) / 2 { j as f64 } else { j as f64 - modes as f64 };
                2.0 * std::f64::consts::PI * m / period
            }
            Axis::Walled { length, .. } => std::f64::consts::PI * j as f64 / length,
        }
    }

    /// `∫ |b_j|²` over one period or across the wall gap.
    pub fn weight(&self, basis: Basis, j: usize) -> f64 {
        match (self, basis) {
            (Axis::Periodic { period, .. }, _) => *period,
            (Axis::Walled { .. }, Basis::Sin) if j == 0 => 0.0,
            (Axis::Walled { length, .. }, Basis::Cos) if j == 0 => *length,
            (Axis::Walled { length, .. }, _) => 0.5 * length,
        }
    }

    fn check(&self) -> Result<(), String> {
        let (e, n) = (self.extent(), self.modes());
        if !(e > 0.0 && e.is_finite()) || n == 0 {
            return Err(format!("axis {self:?} needs a positive extent and at least one mode"));
        }
        Ok(())
    }
}

/// Multiplier and target basis of `∂` on mode `j`.
fn derivative(axis: &Axis, basis: Basis, j: usize) -> (Complex64, Basis) {
    let k = axis.wavenumber(j);
    match basis {
        Basis::Exp => (I * k, Basis::Exp),
        Basis::Sin => (Complex64::from(k), Basis::Cos),
        Basis::Cos => (Complex64::from(-k), Basis::Sin),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub axes: [Axis; 3],
    pub domain: DomainSpec,
}

impl SpectralGrid {
    /// `0 < x₃ < L`, periods `p` on `x₁, x₂`.
    pub fn slab(l: f64, periods: [f64; 2], modes: [usize; 3]) -> Result<Self, HelmholtzError> {
        Self::new(
            [
                Axis::Periodic { period: periods[0], modes: modes[0] },
                Axis::Periodic { period: periods[1], modes: modes[1] },
                Axis::Walled { length: l, modes: modes[2] },
            ],
            DomainSpec::Slab { l },
        )
    }

    /// `0 < x₂ < L₁, 0 < x₃ < L₂`, period `p` on `x₁`.
    pub fn cylinder(l: [f64; 2], period: f64, modes: [usize; 3]) -> Result<Self, HelmholtzError> {
        Self::new(
            [
                Axis::Periodic { period, modes: modes[0] },
                Axis::Walled { length: l[0], modes: modes[1] },
                Axis::Walled { length: l[1], modes: modes[2] },
            ],
            DomainSpec::Cylinder { l },
        )
    }

    /// Fully periodic box standing in for full space.
    pub fn periodic_box(periods: [f64; 3], modes: [usize; 3]) -> Result<Self, HelmholtzError> {
        Self::new(std::array::from_fn(|a| Axis::Periodic { period: periods[a], modes: modes[a] }), DomainSpec::FullSpace)
    }

    /// Grid for a supported domain; `periods` are used on unbounded axes.
    pub fn for_domain(domain: &DomainSpec, periods: [f64; 3], modes: [usize; 3]) -> Result<Self, HelmholtzError> {
        match domain {
            DomainSpec::FullSpace => Self::periodic_box(periods, modes),
            DomainSpec::Slab { l } => Self::slab(*l, [periods[0], periods[1]], modes),
            DomainSpec::Cylinder { l } => Self::cylinder(*l, periods[0], modes),
            other => Err(HelmholtzError::InvalidGrid(format!("no spectral grid for the {} domain", other.kind()))),
        }
    }

    pub fn new(axes: [Axis; 3], domain: DomainSpec) -> Result<Self, HelmholtzError> {
        for a in &axes {
            a.check().map_err(HelmholtzError::InvalidGrid)?;
        }
        if axes[0].is_walled() {
            return Err(HelmholtzError::InvalidGrid("axis 1 must be periodic".into()));
        }
        Ok(SpectralGrid { axes, domain })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.axes.map(|a| a.modes())
    }

    pub fn max_wavenumber(&self) -> f64 {
        self.axes.iter().map(|a| (0..a.modes()).map(|j| a.wavenumber(j).abs()).fold(0.0, f64::max)).fold(0.0, f64::max)
    }

    /// Bases of component `c` (0-based) for the given parity.
    pub fn component_bases(&self, parity: Parity, c: usize) -> [Basis; 3] {
        std::array::from_fn(|a| {
            if !self.axes[a].is_walled() {
                Basis::Exp
            } else {
                let tangential = a != c;
                match (parity, tangential) {
                    (Parity::Electric, true) | (Parity::Magnetic, false) => Basis::Sin,
                    _ => Basis::Cos,
                }
            }
        })
    }

    pub fn scalar_bases(&self, bc: ScalarBc) -> [Basis; 3] {
        std::array::from_fn(|a| match (self.axes[a].is_walled(), bc) {
            (false, _) => Basis::Exp,
            (true, ScalarBc::Dirichlet) => Basis::Sin,
            (true, ScalarBc::Neumann) => Basis::Cos,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Electric,
    Magnetic,
}

impl Parity {
    pub fn dual(self) -> Self {
        match self {
            Parity::Electric => Parity::Magnetic,
            Parity::Magnetic => Parity::Electric,
        }
    }

    /// Scalar boundary condition whose gradients have this parity.
    pub fn scalar_bc(self) -> ScalarBc {
        match self {
            Parity::Electric => ScalarBc::Dirichlet,
            Parity::Magnetic => ScalarBc::Neumann,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarBc {
    Dirichlet,
    Neumann,
}

/// `∂` along array dimension `dim`, which lies on grid axis `grid_axes[dim]`.
fn differentiate<D: RemoveAxis>(data: &Array<Complex64, D>, bases: &[Basis], grid_axes: &[Axis], dim: usize) -> (Array<Complex64, D>, Vec<Basis>) {
    let mut out = data.clone();
    let mut new_bases = bases.to_vec();
    let axis = &grid_axes[dim];
    new_bases[dim] = derivative(axis, bases[dim], 0).1;
    for (j, mut lane) in out.axis_iter_mut(NdAxis(dim)).enumerate() {
        let m = derivative(axis, bases[dim], j).0;
        lane.mapv_inplace(|v| v * m);
    }
    (out, new_bases)
}

/// Weighted `Σ w u v̄` over the tensor basis.
fn inner<D: Dimension>(u: &Array<Complex64, D>, v: &Array<Complex64, D>, bases: &[Basis], axes: &[Axis]) -> Complex64 {
    let mut acc = ZERO;
    for ((idx, a), b) in u.indexed_iter().zip(v.iter()) {
        let idx = idx.into_dimension();
        let w: f64 = idx.slice().iter().enumerate().map(|(d, &j)| axes[d].weight(bases[d], j)).product();
        if w != 0.0 {
            acc += *a * b.conj() * w;
        }
    }
    acc
}

fn max_abs<D: Dimension>(a: &Array<Complex64, D>) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Zeroes the identically vanishing `sin(0·x)` entries.
fn zero_dead_modes<D: RemoveAxis>(data: &mut Array<Complex64, D>, bases: &[Basis]) {
    for (d, b) in bases.iter().enumerate() {
        if *b == Basis::Sin && data.shape()[d] > 0 {
            data.index_axis_mut(NdAxis(d), 0).fill(ZERO);
        }
    }
}

/// A scalar on a [`SpectralGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: SpectralGrid,
    pub bc: ScalarBc,
    pub data: Array3<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: &SpectralGrid, bc: ScalarBc) -> Self {
        ScalarField { grid: grid.clone(), bc, data: Array3::zeros(grid.shape()) }
    }

    pub fn random(grid: &SpectralGrid, bc: ScalarBc, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Array3::from_shape_simple_fn(grid.shape(), || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        zero_dead_modes(&mut data, &grid.scalar_bases(bc));
        ScalarField { grid: grid.clone(), bc, data }
    }

    pub fn bases(&self) -> [Basis; 3] {
        self.grid.scalar_bases(self.bc)
    }

    pub fn grad(&self) -> SpectralField {
        let parity = match self.bc {
            ScalarBc::Dirichlet => Parity::Electric,
            ScalarBc::Neumann => Parity::Magnetic,
        };
        let comps = std::array::from_fn(|c| differentiate(&self.data, &self.bases(), &self.grid.axes, c).0);
        SpectralField { grid: self.grid.clone(), parity, comps }
    }

    pub fn max_norm(&self) -> f64 {
        max_abs(&self.data)
    }
}

/// A vector field on a [`SpectralGrid`] with a fixed boundary parity.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: SpectralGrid,
    pub parity: Parity,
    pub comps: [Array3<Complex64>; 3],
}

impl SpectralField {
    pub fn zeros(grid: &SpectralGrid, parity: Parity) -> Self {
        SpectralField { grid: grid.clone(), parity, comps: std::array::from_fn(|_| Array3::zeros(grid.shape())) }
    }

    /// Uniform random coefficients in the unit square on every live mode.
    pub fn random(grid: &SpectralGrid, parity: Parity, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = Self::zeros(grid, parity);
        for c in 0..3 {
            f.comps[c] = Array3::from_shape_simple_fn(grid.shape(), || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            zero_dead_modes(&mut f.comps[c], &grid.component_bases(parity, c));
        }
        f
    }

    /// `curl A` for a random potential `A` of the dual parity: band-limited and exactly solenoidal.
    pub fn random_solenoidal(grid: &SpectralGrid, parity: Parity, seed: u64) -> Self {
        Self::random(grid, parity.dual(), seed).curl()
    }

    pub fn bases(&self, c: usize) -> [Basis; 3] {
        self.grid.component_bases(self.parity, c)
    }

    fn d(&self, c: usize, axis: usize) -> Array3<Complex64> {
        differentiate(&self.comps[c], &self.bases(c), &self.grid.axes, axis).0
    }

    pub fn curl(&self) -> SpectralField {
        let comps = [&self.d(2, 1) - &self.d(1, 2), &self.d(0, 2) - &self.d(2, 0), &self.d(1, 0) - &self.d(0, 1)];
        SpectralField { grid: self.grid.clone(), parity: self.parity.dual(), comps }
    }

    pub fn div(&self) -> ScalarField {
        let data = self.d(0, 0) + self.d(1, 1) + self.d(2, 2);
        ScalarField { grid: self.grid.clone(), bc: self.parity.scalar_bc(), data }
    }

    pub fn inner(&self, other: &SpectralField) -> Complex64 {
        assert_eq!(self.parity, other.parity, "inner product of fields with different parity");
        (0..3).map(|c| inner(&self.comps[c], &other.comps[c], &self.bases(c), &self.grid.axes)).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn max_norm(&self) -> f64 {
        self.comps.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        assert_eq!(self.parity, other.parity);
        SpectralField { grid: self.grid.clone(), parity: self.parity, comps: std::array::from_fn(|c| &self.comps[c] - &other.comps[c]) }
    }

    pub fn scale(&self, s: Complex64) -> SpectralField {
        SpectralField { grid: self.grid.clone(), parity: self.parity, comps: std::array::from_fn(|c| self.comps[c].mapv(|v| v * s)) }
    }

    /// Largest coefficient on modes where every wavenumber vanishes.
    pub fn harmonic_content(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..3 {
            let bases = self.bases(c);
            if bases.contains(&Basis::Sin) {
                continue;
            }
            worst = worst.max(self.comps[c][[0, 0, 0]].norm());
        }
        worst
    }

    pub fn remove_harmonic(&mut self) {
        for c in 0..3 {
            if !self.bases(c).contains(&Basis::Sin) {
                self.comps[c][[0, 0, 0]] = ZERO;
            }
        }
    }

    /// Max-norm of the components that must vanish on the walls (tangential for
    /// electric parity, normal for magnetic), evaluated from the series at both walls.
    pub fn boundary_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, axis) in self.grid.axes.iter().enumerate() {
            let Axis::Walled { length, .. } = *axis else { continue };
            for c in 0..3 {
                let must_vanish = match self.parity {
                    Parity::Electric => c != a,
                    Parity::Magnetic => c == a,
                };
                if !must_vanish {
                    continue;
                }
                let basis = self.bases(c)[a];
                for x in [0.0, length] {
                    worst = worst.max(max_abs(&trace(&self.comps[c], basis, axis, a, x)));
                }
            }
        }
        worst
    }
}

/// Contracts axis `dim` of the series against its basis functions at the point `x`.
fn trace<D: RemoveAxis>(data: &Array<Complex64, D>, basis: Basis, axis: &Axis, dim: usize, x: f64) -> Array<Complex64, D::Smaller> {
    let mut out = Array::zeros(data.raw_dim().remove_axis(NdAxis(dim)));
    for (j, lane) in data.axis_iter(NdAxis(dim)).enumerate() {
        let k = axis.wavenumber(j);
        let b = match basis {
            Basis::Sin => Complex64::from((k * x).sin()),
            Basis::Cos => Complex64::from((k * x).cos()),
            Basis::Exp => (I * k * x).exp(),
        };
        out.zip_mut_with(&lane, |o, v| *o += v * b);
    }
    out
}

/// Cross-section (axes 2, 3) helpers shared by the potential solver.
pub(crate) fn cross_derivative(data: &Array2<Complex64>, bases: [Basis; 2], axes: [Axis; 2], dim: usize) -> (Array2<Complex64>, [Basis; 2]) {
    let (out, b) = differentiate(data, &bases, &axes, dim);
    (out, [b[0], b[1]])
}

pub(crate) fn cross_inner(u: &Array2<Complex64>, v: &Array2<Complex64>, bases: [Basis; 2], axes: [Axis; 2]) -> Complex64 {
    inner(u, v, &bases, &axes)
}
