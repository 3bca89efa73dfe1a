//! Decay tables for the localized bumps and for gradients escaping to infinity.

use std::fmt::Write as _;

use ndarray::Array3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bump::{build_bump, Bump};
use super::fft::{Fft3, PeriodicBox};
use super::{cutoff, cutoff_d1, find_null_direction, SingularSequenceSpec, WeylError};
use crate::coefficients::{CoefficientField, Tensor};
use crate::linalg::sym_norm2;
use crate::sampling::fibonacci_sphere;
use crate::{Mat3, Point};

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub r: f64,
    pub delta: f64,
    /// `‖div(a∇u_{r,δ})‖_{Ḣ⁻¹}`
    pub n: f64,
    /// `‖a − a(x₀)‖_{L∞(B_{2δ})} + Ĉ|a(x₀)|(1/(rδ) + 1/(rδ²))`
    pub b: f64,
    pub ratio: f64,
    pub first_term: f64,
    pub grad_l2: f64,
    pub grad_sup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayTable {
    pub x0: [f64; 3],
    pub theta: [f64; 3],
    pub a0_norm: f64,
    pub c_hat: f64,
    pub rows: Vec<DecayRow>,
    pub bound_holds: bool,
    pub strictly_decreasing: bool,
}

impl DecayTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,delta,N,B,ratio\n");
        for row in &self.rows {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", row.r, row.delta, row.n, row.b, row.ratio);
        }
        s
    }

    pub fn final_over_initial(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |l| l.n / self.rows[0].n)
    }
}

/// Decay table for `a = νε + σ` around `x₀`.
pub fn verify_decay(field: &CoefficientField, nu: f64, x0: Point, schedule: &[(f64, f64)], box_n: usize) -> Result<DecayTable, WeylError> {
    let a = |x: &Point| field.eval(Tensor::Eps, x) * nu + field.eval(Tensor::Sigma, x);
    verify_decay_with(&a, x0, schedule, box_n)
}

pub fn verify_decay_with(a: &(dyn Fn(&Point) -> Mat3 + Sync), x0: Point, schedule: &[(f64, f64)], box_n: usize) -> Result<DecayTable, WeylError> {
    let a0 = a(&x0);
    let theta = find_null_direction(&a0)?;
    let spec = SingularSequenceSpec::new(x0, theta, schedule.to_vec(), box_n)?;
    let measured: Vec<(f64, f64, f64, f64)> = spec
        .schedule
        .par_iter()
        .map(|&(r, delta)| {
            let bump = build_bump(&spec, r, delta)?;
            let fft = Fft3::new(bump.grid.n);
            let mut grad = bump.gradient_envelope(&fft);
            let (l2, sup) = (bump.grad_l2(&grad), bump.grad_sup(&grad));
            let mut first = 0.0f64;
            for (idx, _) in bump.envelope.indexed_iter() {
                let x = bump.grid.point(idx);
                if (x - x0).norm() <= 2.0 * delta {
                    first = first.max(sym_norm2(&(a(&x) - a0)));
                }
            }
            let n = bump.div_flux_hminus1(&fft, &mut grad, &|x| a(x).map(Complex64::from));
            Ok((n, first, l2, sup))
        })
        .collect::<Result<_, WeylError>>()?;
    let a0_norm = sym_norm2(&a0);
    let scale = |r: f64, d: f64| 1.0 / (r * d) + 1.0 / (r * d * d);
    let (r1, d1) = spec.schedule[0];
    let c_hat = if a0_norm > 0.0 { ((measured[0].0 - measured[0].1) / (a0_norm * scale(r1, d1))).max(0.0) } else { 0.0 };
    let rows: Vec<DecayRow> = spec
        .schedule
        .iter()
        .zip(&measured)
        .map(|(&(r, delta), &(n, first, grad_l2, grad_sup))| {
            let b = first + c_hat * a0_norm * scale(r, delta);
            DecayRow { r, delta, n, b, ratio: if b > 0.0 { n / b } else { f64::INFINITY }, first_term: first, grad_l2, grad_sup }
        })
        .collect();
    let bound_holds = rows.iter().all(|row| row.n <= row.b * (1.0 + 1e-9));
    let strictly_decreasing = rows.windows(2).all(|w| w[1].n < w[0].n);
    Ok(DecayTable { x0: x0.into(), theta: theta.into(), a0_norm, c_hat, rows, bound_holds, strictly_decreasing })
}

/// Smooth test functions `v` for the weak-convergence check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestFunction {
    Constant { value: f64 },
    /// `v = g·x`
    Linear { gradient: [f64; 3] },
    /// `v = χ(|x − center|/radius)`
    Bump { center: [f64; 3], radius: f64 },
}

impl TestFunction {
    pub fn grad(&self, x: &Point) -> Point {
        match *self {
            TestFunction::Constant { .. } => Point::zeros(),
            TestFunction::Linear { gradient } => gradient.into(),
            TestFunction::Bump { center, radius } => {
                let d = x - Point::from(center);
                let rho = d.norm();
                if rho == 0.0 {
                    Point::zeros()
                } else {
                    d * (cutoff_d1(rho / radius) / (radius * rho))
                }
            }
        }
    }

    /// `‖∇v‖_∞`
    pub fn grad_sup(&self) -> f64 {
        match *self {
            TestFunction::Constant { .. } => 0.0,
            TestFunction::Linear { gradient } => Point::from(gradient).norm(),
            // max of the quintic smoothstep slope is 15/8
            TestFunction::Bump { radius, .. } => 1.875 / radius,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakRow {
    pub r: f64,
    pub delta: f64,
    pub inner_re: f64,
    pub inner_im: f64,
    /// `∫ |∇u||∇v|`
    pub majorant: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakSeries {
    pub test_function: TestFunction,
    pub rows: Vec<WeakRow>,
    /// `C` with `|⟨∇u, ∇v⟩| ≤ C δ^{3/2} ‖∇v‖_∞`, fitted on the first entry.
    pub c_fit: f64,
    pub bound_holds: bool,
    /// Log-log slope of the majorant against `δ`; `None` when it vanishes.
    pub exponent: Option<f64>,
}

fn loglog_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 || pts.iter().any(|p| !(p.1 > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// `⟨∇u_{r,δ}, ∇v⟩` along the schedule for each test function.
pub fn weak_convergence_check(spec: &SingularSequenceSpec, test_functions: &[TestFunction]) -> Result<Vec<WeakSeries>, WeylError> {
    spec.check()?;
    let per_entry: Vec<Vec<WeakRow>> = spec
        .schedule
        .par_iter()
        .map(|&(r, delta)| {
            let bump = build_bump(spec, r, delta)?;
            let fft = Fft3::new(bump.grid.n);
            let grad = bump.gradient_envelope(&fft);
            let dv = bump.grid.cell_volume();
            Ok(test_functions
                .iter()
                .map(|tf| {
                    let (mut inner, mut major) = (Complex64::new(0.0, 0.0), 0.0);
                    for (idx, _) in bump.envelope.indexed_iter() {
                        let x = bump.grid.point(idx);
                        let gv = tf.grad(&x);
                        if gv == Point::zeros() {
                            continue;
                        }
                        let phase = Complex64::new(0.0, r * spec.theta.dot(&x)).exp();
                        let g = [grad[0][idx], grad[1][idx], grad[2][idx]];
                        inner += phase * (g[0] * gv.x + g[1] * gv.y + g[2] * gv.z);
                        major += (g[0].norm_sqr() + g[1].norm_sqr() + g[2].norm_sqr()).sqrt() * gv.norm();
                    }
                    WeakRow { r, delta, inner_re: inner.re * dv, inner_im: inner.im * dv, majorant: major * dv }
                })
                .collect())
        })
        .collect::<Result<_, WeylError>>()?;
    Ok(test_functions
        .iter()
        .enumerate()
        .map(|(t, tf)| {
            let rows: Vec<WeakRow> = per_entry.iter().map(|e| e[t].clone()).collect();
            let gs = tf.grad_sup();
            let c_fit = if gs > 0.0 { rows[0].majorant / (rows[0].delta.powf(1.5) * gs) } else { 0.0 };
            let bound_holds = rows.iter().all(|w| w.inner_re.hypot(w.inner_im) <= c_fit * w.delta.powf(1.5) * gs * (1.0 + 1e-9) + 1e-300);
            let exponent = loglog_slope(&rows.iter().map(|w| (w.delta, w.majorant)).collect::<Vec<_>>());
            WeakSeries { test_function: *tf, rows, c_fit, bound_holds, exponent }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct InfinityRow {
    pub n: usize,
    pub radius: f64,
    /// Sampled `sup_{|x| ≥ R_n} ‖ω₀ε + iσ‖₂`.
    pub sup_sampled: f64,
    /// `‖div((ω₀ε + iσ)∇φ_n)‖_{Ḣ⁻¹}` with `‖∇φ_n‖ = 1`.
    pub norm: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InfinityTable {
    pub omega0_im: f64,
    pub rows: Vec<InfinityRow>,
}

const SPHERE_DIRECTIONS: usize = 256;
/// Radial factors of the sampling spheres.
const SPHERE_FACTORS: [f64; 7] = [1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0];
/// Points per side of the box carrying `φ_n`, and the bump radius.
const ESCAPE_GRID: usize = 48;
const ESCAPE_RADIUS: f64 = 1.0;
/// Discretization slack relative to `1/n`.
const ESCAPE_SLACK: f64 = 0.01;

/// Sequence `φ_n` supported in `|x| > R_n` for `ω₀ = −iσ₀/ε₀`.
pub fn infinity_sequence(field: &CoefficientField, n_max: usize, radii: &[f64]) -> Result<InfinityTable, WeylError> {
    if field.bounded_domain {
        return Err(WeylError::BoundedDomain);
    }
    if radii.len() < n_max {
        return Err(WeylError::InvalidSpec(format!("{} radii given for n_max = {n_max}", radii.len())));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return Err(WeylError::InvalidSpec("radii must be finite, non-negative and increasing".into()));
    }
    let inf = field.at_infinity;
    let ratio = inf.sigma0 / inf.eps0;
    // ω₀ε + iσ = i(σ − (σ₀/ε₀)ε)
    let m = |x: &Point| field.eval(Tensor::Sigma, x) - field.eval(Tensor::Eps, x) * ratio;
    let dirs = fibonacci_sphere(SPHERE_DIRECTIONS);
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let radius = radii[n - 1];
        let bound = 1.0 / n as f64;
        let mut sup = 0.0f64;
        for f in SPHERE_FACTORS {
            for d in &dirs {
                sup = sup.max(sym_norm2(&m(&(d * (radius * f)))));
            }
        }
        if sup >= bound {
            return Err(WeylError::DecayNotReached { n, radius, sup, bound });
        }
        let center = Point::x() * (radius + 2.5 * ESCAPE_RADIUS);
        let grid = PeriodicBox::cube(center.into(), 8.0 * ESCAPE_RADIUS, ESCAPE_GRID);
        let envelope: Array3<Complex64> = grid.grid_from_fn(|x| Complex64::from(cutoff((x - center).norm() / ESCAPE_RADIUS)));
        let phi = Bump { r: 0.0, delta: ESCAPE_RADIUS, x0: center, theta: Point::x(), grid, envelope };
        let fft = Fft3::new(grid.n);
        let mut grad = phi.gradient_envelope(&fft);
        let scale = 1.0 / phi.grad_l2(&grad);
        for g in grad.iter_mut() {
            g.mapv_inplace(|v| v * scale);
        }
        let norm = phi.div_flux_hminus1(&fft, &mut grad, &|x| m(x).map(Complex64::from));
        rows.push(InfinityRow { n, radius, sup_sampled: sup, norm, bound, passed: norm <= bound * (1.0 + ESCAPE_SLACK) });
    }
    Ok(InfinityTable { omega0_im: -ratio, rows })
}
