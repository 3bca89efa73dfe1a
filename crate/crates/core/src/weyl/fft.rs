//! 3-D FFTs on periodic boxes and the discrete `Ḣ⁻¹` norm.

use std::sync::Arc;

use ndarray::{Array3, Axis as NdAxis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

/// Periodic box `Π [c_a − side_a/2, c_a + side_a/2)` with `n_a` points per side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicBox {
    pub center: [f64; 3],
    pub side: [f64; 3],
    pub n: [usize; 3],
}

impl PeriodicBox {
    pub fn cube(center: [f64; 3], side: f64, n: usize) -> Self {
        PeriodicBox { center, side: [side; 3], n: [n; 3] }
    }

    pub fn spacing(&self, a: usize) -> f64 {
        self.side[a] / self.n[a] as f64
    }

    pub fn volume(&self) -> f64 {
        self.side.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, a: usize, i: usize) -> f64 {
        self.center[a] - 0.5 * self.side[a] + i as f64 * self.spacing(a)
    }

    pub fn point(&self, idx: (usize, usize, usize)) -> crate::Point {
        crate::Point::new(self.coord(0, idx.0), self.coord(1, idx.1), self.coord(2, idx.2))
    }

    /// Angular wavenumber of FFT index `j` on axis `a`.
    pub fn wavenumber(&self, a: usize, j: usize) -> f64 {
        let n = self.n[a];
        let m = if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 };
        2.0 * std::f64::consts::PI * m / self.side[a]
    }

    pub fn wavevector(&self, idx: (usize, usize, usize)) -> [f64; 3] {
        [self.wavenumber(0, idx.0), self.wavenumber(1, idx.1), self.wavenumber(2, idx.2)]
    }

    pub fn grid_from_fn(&self, f: impl Fn(&crate::Point) -> Complex64) -> Array3<Complex64> {
        Array3::from_shape_fn(self.n, |(i, j, k)| f(&self.point((i, j, k))))
    }
}

/// Planned forward/inverse transforms for one shape. The forward transform is
/// unnormalized; the inverse divides by the number of points.
pub struct Fft3 {
    shape: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl Fft3 {
    pub fn new(shape: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = shape.map(|n| planner.plan_fft_forward(n));
        let inv = shape.map(|n| planner.plan_fft_inverse(n));
        Fft3 { shape, fwd, inv }
    }

    pub fn forward(&self, a: &mut Array3<Complex64>) {
        self.run(a, &self.fwd);
    }

    pub fn inverse(&self, a: &mut Array3<Complex64>) {
        self.run(a, &self.inv);
        let s = 1.0 / a.len() as f64;
        a.mapv_inplace(|v| v * s);
    }

    fn run(&self, a: &mut Array3<Complex64>, plans: &[Arc<dyn Fft<f64>>; 3]) {
        assert_eq!(a.shape(), &self.shape[..], "array shape does not match the plan");
        for (ax, plan) in plans.iter().enumerate() {
            let mut buf = vec![Complex64::new(0.0, 0.0); self.shape[ax]];
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            for mut lane in a.lanes_mut(NdAxis(ax)) {
                if let Some(s) = lane.as_slice_mut() {
                    plan.process_with_scratch(s, &mut scratch);
                    continue;
                }
                for (b, v) in buf.iter_mut().zip(lane.iter()) {
                    *b = *v;
                }
                plan.process_with_scratch(&mut buf, &mut scratch);
                for (v, b) in lane.iter_mut().zip(&buf) {
                    *v = *b;
                }
            }
        }
    }
}

/// `(Σ_{ξ≠0} |ĝ(ξ)|²/|ξ|²)^{1/2}` with `ĝ` the Fourier coefficients of `g`
/// (`g = Σ ĝ(ξ) e^{iξ·x}`), so a single unit mode `e^{iξ·x}` has norm `1/|ξ|`.
/// The mean of `g` is discarded.
pub fn hminus1_norm(g: &Array3<Complex64>, bx: &PeriodicBox) -> f64 {
    let mut c = g.clone();
    Fft3::new(bx.n).forward(&mut c);
    let n = bx.len() as f64;
    let mut acc = 0.0;
    for (idx, v) in c.indexed_iter() {
        let k = bx.wavevector(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 > 0.0 {
            acc += (v / n).norm_sqr() / k2;
        }
    }
    acc.sqrt()
}

/// The same norm scaled by `√V`, approximating `‖g‖_{Ḣ⁻¹(ℝ³)}` for `g` supported inside the box.
pub fn hminus1_norm_continuum(g: &Array3<Complex64>, bx: &PeriodicBox) -> f64 {
    hminus1_norm(g, bx) * bx.volume().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_single_mode() {
        let bx = PeriodicBox { center: [0.3, 0.0, -1.0], side: [2.0, 3.0, 4.0], n: [8, 6, 5] };
        let fft = Fft3::new(bx.n);
        let k = [bx.wavenumber(0, 1), bx.wavenumber(1, 5), bx.wavenumber(2, 2)];
        let g = bx.grid_from_fn(|x| Complex64::new(0.0, k[0] * x.x + k[1] * x.y + k[2] * x.z).exp());
        let mut c = g.clone();
        fft.forward(&mut c);
        let peak = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!((peak - bx.len() as f64).abs() < 1e-9);
        fft.inverse(&mut c);
        assert!(c.iter().zip(g.iter()).all(|(a, b)| (a - b).norm() < 1e-12));
        let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        assert!((hminus1_norm(&g, &bx) - 1.0 / kn).abs() < 1e-12 / kn);
    }

    #[test]
    fn zero_and_constant_have_zero_norm() {
        let bx = PeriodicBox::cube([0.0; 3], 1.0, 4);
        assert_eq!(hminus1_norm(&Array3::zeros(bx.n), &bx), 0.0);
        assert_eq!(hminus1_norm(&Array3::from_elem(bx.n, Complex64::new(2.0, 1.0)), &bx), 0.0);
    }

    #[test]
    fn wavenumbers_in_fft_order() {
        let bx = PeriodicBox::cube([0.0; 3], 2.0 * std::f64::consts::PI, 5);
        assert_eq!((0..5).map(|j| bx.wavenumber(0, j)).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0, -2.0, -1.0]);
    }
}
