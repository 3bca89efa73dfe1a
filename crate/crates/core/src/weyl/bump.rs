//! Localized oscillating bumps `u_{r,δ}(x) = δ^{−3/2} χ(|x−x₀|/δ) r⁻¹ e^{irθ·x}`.
//!
//! The envelope is sampled on a periodic box around `x₀`; the carrier stays in
//! closed form, so derivatives act on the envelope as `∇ + irθ`.

use nalgebra::Matrix3;
use ndarray::Array3;
use num_complex::Complex64;

use super::fft::{Fft3, PeriodicBox};
use super::{cutoff, SingularSequenceSpec, WeylError, MIN_POINTS_PER_DELTA};
use crate::Point;

#[derive(Clone, Debug)]
pub struct Bump {
    pub r: f64,
    pub delta: f64,
    pub x0: Point,
    pub theta: Point,
    pub grid: PeriodicBox,
    /// `δ^{−3/2} χ(|x−x₀|/δ) / r` on the grid.
    pub envelope: Array3<Complex64>,
}

pub fn build_bump(spec: &SingularSequenceSpec, r: f64, delta: f64) -> Result<Bump, WeylError> {
    let grid = spec.box_for(delta);
    let per_delta = delta / grid.spacing(0);
    if per_delta < MIN_POINTS_PER_DELTA * (1.0 - 1e-12) {
        return Err(WeylError::Resolution(format!(
            "at least {MIN_POINTS_PER_DELTA} points across delta = {delta} are required, the grid has {per_delta:.2}"
        )));
    }
    let amp = delta.powf(-1.5) / r;
    let x0 = spec.x0;
    let envelope = grid.grid_from_fn(|x| Complex64::from(amp * cutoff((x - x0).norm() / delta)));
    Ok(Bump { r, delta, x0, theta: spec.theta, grid, envelope })
}

impl Bump {
    /// Shifted wavevector `ξ + rθ` of FFT index `idx`.
    pub(crate) fn shifted(&self, idx: (usize, usize, usize)) -> [f64; 3] {
        let k = self.grid.wavevector(idx);
        std::array::from_fn(|a| k[a] + self.r * self.theta[a])
    }

    /// `e^{−irθ·x} ∇u` on the grid, differentiated spectrally.
    pub fn gradient_envelope(&self, fft: &Fft3) -> [Array3<Complex64>; 3] {
        let mut hat = self.envelope.clone();
        fft.forward(&mut hat);
        std::array::from_fn(|a| {
            let mut g = hat.clone();
            for (idx, v) in g.indexed_iter_mut() {
                *v *= Complex64::new(0.0, self.shifted(idx)[a]);
            }
            fft.inverse(&mut g);
            g
        })
    }

    pub fn grad_l2(&self, grad: &[Array3<Complex64>; 3]) -> f64 {
        let s: f64 = grad.iter().flat_map(|g| g.iter()).map(|v| v.norm_sqr()).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn grad_sup(&self, grad: &[Array3<Complex64>; 3]) -> f64 {
        let mut worst = 0.0f64;
        for ((a, b), c) in grad[0].iter().zip(grad[1].iter()).zip(grad[2].iter()) {
            worst = worst.max((a.norm_sqr() + b.norm_sqr() + c.norm_sqr()).sqrt());
        }
        worst
    }

    /// `‖div(a∇u)‖_{Ḣ⁻¹}` with `a` evaluated at the grid points; `grad` is overwritten.
    pub fn div_flux_hminus1(&self, fft: &Fft3, grad: &mut [Array3<Complex64>; 3], a: &(dyn Fn(&Point) -> Matrix3<Complex64> + Sync)) -> f64 {
        let n = self.grid.n;
        for i in 0..n[0] {
            for j in 0..n[1] {
                for k in 0..n[2] {
                    let m = a(&self.grid.point((i, j, k)));
                    let g = [grad[0][[i, j, k]], grad[1][[i, j, k]], grad[2][[i, j, k]]];
                    for (row, out) in grad.iter_mut().enumerate() {
                        out[[i, j, k]] = m[(row, 0)] * g[0] + m[(row, 1)] * g[1] + m[(row, 2)] * g[2];
                    }
                }
            }
        }
        for w in grad.iter_mut() {
            fft.forward(w);
        }
        let npts = self.grid.len() as f64;
        let mut acc = 0.0;
        for (idx, w0) in grad[0].indexed_iter() {
            let q = self.shifted(idx);
            let q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
            if q2 == 0.0 {
                continue;
            }
            let h = q[0] * *w0 + q[1] * grad[1][idx] + q[2] * grad[2][idx];
            acc += (h / npts).norm_sqr() / q2;
        }
        (acc * self.grid.volume()).sqrt()
    }

    /// Value of `u` at a point (closed form).
    pub fn value(&self, x: &Point) -> Complex64 {
        let env = self.delta.powf(-1.5) / self.r * cutoff((x - self.x0).norm() / self.delta);
        Complex64::new(0.0, self.r * self.theta.dot(x)).exp() * env
    }
}
