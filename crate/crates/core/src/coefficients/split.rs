use serde::Serialize;

use super::{AtInfinity, CoefficientError, CoefficientField, Tensor};
use crate::linalg;
use crate::sampling::fibonacci_sphere;
use crate::{Mat3, Point};

/// Directions per sampling sphere.
pub const SPHERE_SAMPLES: usize = 256;

/// `T = t₀I + T_c + T_δ` with `T_c` supported in the open ball of radius `R_c`.
///
/// The compact part is the deviation from the limit clipped to the ball; the small
/// part is the deviation outside it.
#[derive(Clone, Debug)]
pub struct CoefficientSplit {
    field: CoefficientField,
    pub constant_part: AtInfinity,
    pub support_radius: f64,
    pub small_bound: f64,
    pub delta: f64,
    /// Sampled sphere deviation at each search radius, before the tail maximum.
    pub sphere_deviation: Vec<(f64, f64)>,
}

#[derive(Serialize)]
pub struct SplitSummary {
    pub eps0: f64,
    pub mu0: f64,
    pub sigma0: f64,
    pub support_radius: f64,
    pub small_bound: f64,
    pub delta: f64,
}

impl CoefficientSplit {
    pub fn compact(&self, which: Tensor, x: &Point) -> Mat3 {
        if x.norm() < self.support_radius {
            self.field.eval(which, x) - self.field.limit(which)
        } else {
            Mat3::zeros()
        }
    }

    pub fn small(&self, which: Tensor, x: &Point) -> Mat3 {
        if x.norm() < self.support_radius {
            Mat3::zeros()
        } else {
            self.field.eval(which, x) - self.field.limit(which)
        }
    }

    pub fn constant(&self, which: Tensor) -> Mat3 {
        self.field.limit(which)
    }

    pub fn summary(&self) -> SplitSummary {
        SplitSummary {
            eps0: self.constant_part.eps0,
            mu0: self.constant_part.mu0,
            sigma0: self.constant_part.sigma0,
            support_radius: self.support_radius,
            small_bound: self.small_bound,
            delta: self.delta,
        }
    }
}

/// Largest spectral-norm deviation from the limit over the three tensors on the sphere `|x| = radius`.
pub fn sphere_deviation(field: &CoefficientField, radius: f64, directions: &[Point]) -> f64 {
    let mut worst = 0.0f64;
    for d in directions {
        let x = d * radius;
        for which in Tensor::ALL {
            worst = worst.max(linalg::sym_norm2(&(field.eval(which, &x) - field.limit(which))));
        }
    }
    worst
}

pub fn split(field: &CoefficientField, delta: f64, search_radii: &[f64]) -> Result<CoefficientSplit, CoefficientError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(CoefficientError::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    if search_radii.is_empty() {
        return Err(CoefficientError::InvalidInput("search radii are empty".into()));
    }
    if search_radii[0] < 0.0 || search_radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CoefficientError::InvalidInput("search radii must be nonnegative and strictly increasing".into()));
    }
    let dirs = fibonacci_sphere(SPHERE_SAMPLES);
    let raw: Vec<f64> = search_radii.iter().map(|&r| sphere_deviation(field, r, &dirs)).collect();
    // tail maxima: a radius qualifies only if every larger sampled sphere is also small
    let mut tail = raw.clone();
    for i in (0..tail.len().saturating_sub(1)).rev() {
        tail[i] = tail[i].max(tail[i + 1]);
    }
    let sphere_deviation: Vec<(f64, f64)> = search_radii.iter().copied().zip(raw).collect();
    match tail.iter().position(|&d| d < delta) {
        Some(i) => Ok(CoefficientSplit {
            field: field.clone(),
            constant_part: field.at_infinity,
            support_radius: search_radii[i],
            small_bound: tail[i],
            delta,
            sphere_deviation,
        }),
        None => {
            let (i, best) = tail.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
            Err(CoefficientError::DecayNotReached { delta, best_deviation: best, radius: search_radii[i] })
        }
    }
}
