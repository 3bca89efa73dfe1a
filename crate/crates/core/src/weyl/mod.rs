//! Weyl singular sequences for the divergence-form pencil.
//!
//! At a point `x₀` where `a = νε + σ` is indefinite, the bumps
//! `u_{r,δ} = δ^{−3/2} χ(|x−x₀|/δ) r⁻¹ e^{irθ·x}` with `θᵀa(x₀)θ = 0` have
//! `‖∇u‖` bounded below while `‖div(a∇u)‖_{Ḣ⁻¹}` tends to zero. For the value
//! `ω₀ = −iσ₀/ε₀`, normalized gradients escaping to infinity play the same role.

mod bump;
mod decay;
mod fft;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bump::{build_bump, Bump};
pub use decay::{
    infinity_sequence, verify_decay, verify_decay_with, weak_convergence_check, DecayRow, DecayTable, InfinityRow, InfinityTable, TestFunction, WeakRow, WeakSeries,
};
pub use fft::{hminus1_norm, hminus1_norm_continuum, Fft3, PeriodicBox};

use crate::coefficients::{smoothstep, smoothstep_d1};
use crate::linalg::SortedEigen;
use crate::{Mat3, Point};

/// Grid points required across one `δ`.
pub const MIN_POINTS_PER_DELTA: f64 = 16.0;
/// Smallest box side in units of `δ`: the support `B_{2δ}` keeps a margin of a quarter box.
pub const MIN_BOX_FACTOR: f64 = 8.0;

#[derive(Debug, Error)]
pub enum WeylError {
    #[error("a(x0) is definite (eigenvalues {min:.6e} .. {max:.6e}); no null direction exists")]
    NoNullDirection { min: f64, max: f64 },
    #[error("grid too coarse: {0}")]
    Resolution(String),
    #[error("invalid singular sequence: {0}")]
    InvalidSpec(String),
    #[error("coefficients at radius {radius} deviate by {sup:.3e} from the limit, above the 1/n = {bound:.3e} needed for n = {n}")]
    DecayNotReached { n: usize, radius: f64, sup: f64, bound: f64 },
    #[error("sequences escaping to infinity need an unbounded domain")]
    BoundedDomain,
}

/// `χ(t) = 1 − smoothstep(t − 1)`: one on `[0, 1]`, zero from 2 on, C².
pub fn cutoff(t: f64) -> f64 {
    1.0 - smoothstep(t - 1.0)
}

pub fn cutoff_d1(t: f64) -> f64 {
    -smoothstep_d1(t - 1.0)
}

/// Flips `v` so that its first non-negligible entry is positive.
fn canonical_sign(v: Point) -> Point {
    match v.iter().find(|c| c.abs() > 1e-12) {
        Some(c) if *c < 0.0 => -v,
        _ => v,
    }
}

/// Unit `θ` with `θᵀa₀θ = 0`, built from the extreme eigenvectors.
pub fn find_null_direction(a0: &Mat3) -> Result<Point, WeylError> {
    if a0.iter().all(|v| *v == 0.0) {
        return Ok(Point::x());
    }
    let e = SortedEigen::new(a0);
    let (lmin, lmax) = (e.min(), e.max());
    if lmin > 0.0 || lmax < 0.0 {
        return Err(WeylError::NoNullDirection { min: lmin, max: lmax });
    }
    let vmin = canonical_sign(e.vectors[0]);
    let vmax = canonical_sign(e.vectors[2]);
    let alpha = if lmax == 0.0 { std::f64::consts::FRAC_PI_2 } else { (-lmin / lmax).sqrt().atan() };
    Ok((vmin * alpha.cos() + vmax * alpha.sin()).normalize())
}

/// `{"delta0": .., "halvings": k, "r_rule": "delta^-2.5"}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleRule {
    pub delta0: f64,
    pub halvings: usize,
    pub r_rule: String,
}

impl ScheduleRule {
    /// `(r, δ)` pairs with `δ = δ₀ 2^{−j}`, `j = 0..=halvings`.
    pub fn entries(&self) -> Result<Vec<(f64, f64)>, WeylError> {
        let p = self
            .r_rule
            .strip_prefix("delta^")
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| WeylError::InvalidSpec(format!("r_rule must read delta^<exponent>, got {:?}", self.r_rule)))?;
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            return Err(WeylError::InvalidSpec("delta0 must be positive".into()));
        }
        Ok((0..=self.halvings)
            .map(|j| {
                let d = self.delta0 * 0.5f64.powi(j as i32);
                (d.powf(p), d)
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularSequenceSpec {
    pub x0: Point,
    pub theta: Point,
    pub schedule: Vec<(f64, f64)>,
    /// Grid points per box side.
    pub box_n: usize,
    /// Box side in units of `δ`.
    pub box_factor: f64,
}

impl SingularSequenceSpec {
    pub fn new(x0: Point, theta: Point, schedule: Vec<(f64, f64)>, box_n: usize) -> Result<Self, WeylError> {
        let s = SingularSequenceSpec { x0, theta, schedule, box_n, box_factor: MIN_BOX_FACTOR };
        s.check()?;
        Ok(s)
    }

    pub fn with_box_factor(mut self, f: f64) -> Self {
        self.box_factor = f;
        self
    }

    pub fn check(&self) -> Result<(), WeylError> {
        if (self.theta.norm() - 1.0).abs() > 1e-12 {
            return Err(WeylError::InvalidSpec(format!("theta must be a unit vector, |theta| = {}", self.theta.norm())));
        }
        if self.schedule.is_empty() {
            return Err(WeylError::InvalidSpec("empty schedule".into()));
        }
        for &(r, d) in &self.schedule {
            if !(d > 0.0 && r > 0.0 && r.is_finite()) || r * d.powf(2.5) < 1.0 - 1e-12 {
                return Err(WeylError::InvalidSpec(format!("schedule entry (r = {r}, delta = {d}) violates r·delta^2.5 >= 1")));
            }
        }
        if self.box_factor < MIN_BOX_FACTOR {
            return Err(WeylError::InvalidSpec(format!("box side {}·delta leaves less than a quarter-box margin around B_2delta", self.box_factor)));
        }
        Ok(())
    }

    pub fn box_for(&self, delta: f64) -> PeriodicBox {
        PeriodicBox::cube(self.x0.into(), self.box_factor * delta, self.box_n)
    }
}
