//! Essential spectrum of the divergence-form pencil `div((ωε + iσ)∇·)`.
//!
//! For continuous coefficients, `ω = iν` belongs to the spectrum exactly when
//! `νε(x) + σ(x)` is indefinite (`λ_min ≤ 0 ≤ λ_max`) at some `x`, or in the
//! limit at infinity. Pointwise this happens for `ν ∈ [−λ_max, −λ_min]`, where
//! `λ` are the generalized eigenvalues of `σv = λεv`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coefficients::{CoefficientField, Tensor};
use crate::linalg::{symmetrize, SortedEigen};
use crate::symbol::{Component, Provenance, SpectrumSet};
use crate::{Mat3, Point};

#[derive(Debug, Error)]
pub enum DivformError {
    #[error("permittivity is not symmetric positive definite{}", at.map(|p| format!(" at ({}, {}, {})", p.x, p.y, p.z)).unwrap_or_default())]
    MatrixNotSpd { at: Option<Point> },
    #[error("sample list is empty")]
    EmptySample,
}

/// `[−λ_max, −λ_min]` for the generalized eigenvalues of `(σ, ε)`.
pub fn pointwise_interval(eps: &Mat3, sigma: &Mat3) -> Result<(f64, f64), DivformError> {
    let w = whitened(eps, sigma).ok_or(DivformError::MatrixNotSpd { at: None })?;
    let e = SortedEigen::new(&w);
    Ok((-e.max(), -e.min()))
}

/// `L⁻¹σL⁻ᵀ` with `ε = LLᵀ`; same inertia as `σ + νε` after the shift by `νI`.
fn whitened(eps: &Mat3, sigma: &Mat3) -> Option<Mat3> {
    let chol = symmetrize(eps).cholesky()?;
    let l = chol.l();
    let linv = l.try_inverse()?;
    Some(symmetrize(&(linv * symmetrize(sigma) * linv.transpose())))
}

/// Extreme eigenvalues of `νε + σ` in whitened form; they carry the signs of the original.
fn signs_at(field: &CoefficientField, nu: f64, x: &Point) -> Option<(f64, f64)> {
    let w = whitened(&field.eval(Tensor::Eps, x), &field.eval(Tensor::Sigma, x))?;
    let e = SortedEigen::new(&(w + Mat3::identity() * nu));
    Some((e.min(), e.max()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergedInterval {
    pub nu_min: f64,
    pub nu_max: f64,
    /// A point where `ν = (nu_min + nu_max)/2` makes `νε + σ` indefinite; `None` if only reached at infinity.
    pub witness: Option<[f64; 3]>,
}

#[derive(Clone, Debug)]
pub struct IndefinitenessProfile {
    pub sample_points: Vec<Point>,
    pub intervals: Vec<(f64, f64)>,
    /// Interval of the limit `(ε₀I, σ₀I)`, when the domain is unbounded.
    pub at_infinity: Option<(f64, f64)>,
    pub merged: Vec<MergedInterval>,
    pub tolerance: f64,
}

#[derive(Serialize)]
struct ProfileJson<'a> {
    intervals: &'a [MergedInterval],
    tolerance: f64,
}

impl IndefinitenessProfile {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ProfileJson { intervals: &self.merged, tolerance: self.tolerance }).expect("profile serializes")
    }

    /// A point at which `νε + σ` is indefinite (within `tol`), for `ν` inside the merged set.
    ///
    /// Between a sample where the matrix is positive definite and one where it is
    /// negative definite, continuity forces a sign change; it is located by bisection.
    pub fn witness_for(&self, field: &CoefficientField, nu: f64) -> Option<Point> {
        let tol = self.tolerance;
        if let Some(i) = self.intervals.iter().position(|&(lo, hi)| lo - tol <= nu && nu <= hi + tol) {
            return Some(self.sample_points[i]);
        }
        // positive definite where ν > hi, negative definite where ν < lo
        let pos = self.intervals.iter().position(|&(_, hi)| nu > hi)?;
        let neg_sample = self.intervals.iter().position(|&(lo, _)| nu < lo);
        let (a, b) = match neg_sample {
            Some(j) => (self.sample_points[pos], self.sample_points[j]),
            None => {
                // the far end is the limit at infinity
                self.at_infinity?;
                let p = self.sample_points[pos];
                let mut r = 1.0 + p.norm();
                let far = loop {
                    let q = p + Point::x() * r;
                    match signs_at(field, nu, &q) {
                        Some((min, max)) if min <= tol && max >= -tol => return Some(q),
                        Some((_, max)) if max < 0.0 => break q,
                        _ => {}
                    }
                    r *= 2.0;
                    if r > 1e12 {
                        return None;
                    }
                };
                (p, far)
            }
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let x = a + (b - a) * mid;
            let (min, max) = signs_at(field, nu, &x)?;
            if min <= tol && max >= -tol {
                return Some(x);
            }
            if min > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        None
    }

    /// The set `{iν : ν ∈ merged}`.
    pub fn spectrum(&self) -> SpectrumSet {
        let mut set = SpectrumSet::new(self.tolerance);
        for m in &self.merged {
            let c = if m.nu_max - m.nu_min <= self.tolerance {
                Component::point(Complex64::new(0.0, 0.5 * (m.nu_min + m.nu_max)))
            } else {
                Component::ImagSegment { a: m.nu_min, b: m.nu_max }
            };
            set.push(c, Some(Provenance::Divform));
        }
        set
    }
}

/// Pointwise intervals and their closure.
///
/// The fields are continuous and the supported domains connected, so the union
/// of the pointwise intervals is itself an interval; it is returned as the hull
/// of the sampled intervals (and of the limit at infinity when `unbounded`).
pub fn indefiniteness_profile(field: &CoefficientField, samples: &[Point], tol: f64, unbounded: bool) -> Result<IndefinitenessProfile, DivformError> {
    if samples.is_empty() {
        return Err(DivformError::EmptySample);
    }
    let intervals: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|x| pointwise_interval(&field.eval(Tensor::Eps, x), &field.eval(Tensor::Sigma, x)).map_err(|_| DivformError::MatrixNotSpd { at: Some(*x) }))
        .collect::<Result<_, _>>()?;
    let at_infinity = if unbounded {
        let inf = field.at_infinity;
        Some((-inf.sigma0 / inf.eps0, -inf.sigma0 / inf.eps0))
    } else {
        None
    };
    let mut lo = intervals.iter().map(|i| i.0).fold(f64::INFINITY, f64::min);
    let mut hi = intervals.iter().map(|i| i.1).fold(f64::NEG_INFINITY, f64::max);
    if let Some((a, b)) = at_infinity {
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let mut profile = IndefinitenessProfile { sample_points: samples.to_vec(), intervals, at_infinity, merged: Vec::new(), tolerance: tol };
    let witness = profile.witness_for(field, 0.5 * (lo + hi)).map(Into::into);
    profile.merged.push(MergedInterval { nu_min: lo, nu_max: hi, witness });
    Ok(profile)
}

pub fn divform_essential_spectrum(field: &CoefficientField, samples: &[Point], tol: f64, unbounded: bool) -> Result<SpectrumSet, DivformError> {
    Ok(indefiniteness_profile(field, samples, tol, unbounded)?.spectrum())
}
