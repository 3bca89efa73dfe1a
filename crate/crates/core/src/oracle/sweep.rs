//! Minimal singular values of the discrete pencil over sampled frequencies.

use std::fmt::Write as _;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::yee::{assemble, DiscretePencil};
use super::{GridParams, OracleError};
use crate::coefficients::CoefficientField;
use crate::spectrum::DomainSpec;

/// Unknowns below which a dense SVD may replace inverse iteration.
pub const DENSE_LIMIT: usize = 3000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepOptions {
    pub max_iterations: usize,
    /// Relative change of the estimate accepted as converged.
    pub tolerance: f64,
    pub allow_dense: bool,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { max_iterations: 300, tolerance: 1e-9, allow_dense: true, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SigmaMin {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub dense: bool,
}

pub fn sigma_min_dense(p: &DiscretePencil) -> SigmaMin {
    let sv = p.to_dense().singular_values();
    SigmaMin { value: sv.iter().cloned().fold(f64::INFINITY, f64::min), iterations: 0, converged: true, dense: true }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Krylov basis size before an explicit restart.
const LANCZOS_BASIS: usize = 60;

/// Lanczos on `(MM^†)^{−1}` through one sparse LU of `M`; the largest Ritz
/// value `θ` gives `σ_min = θ^{−1/2}`. `iterations` counts operator
/// applications, `tolerance` bounds the relative Ritz residual.
pub fn sigma_min_sparse(p: &DiscretePencil, opts: &SweepOptions) -> Result<SigmaMin, OracleError> {
    let n = p.dim();
    let triplets: Vec<Triplet<usize, usize, Complex64>> = p.entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let m = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets).map_err(|e| OracleError::Solver(format!("{e:?}")))?;
    let singular = |it| Ok(SigmaMin { value: 0.0, iterations: it, converged: true, dense: false });
    let lu = match m.sp_lu() {
        Ok(lu) => lu,
        // a structurally or numerically singular factorization means a kernel
        Err(_) => return singular(0),
    };
    let op = |x: &[Complex64]| -> Vec<Complex64> {
        let mut col = Mat::from_fn(n, 1, |i, _| x[i]);
        lu.solve_adjoint_in_place(col.as_mut());
        lu.solve_in_place(col.as_mut());
        (0..n).map(|i| col[(i, 0)]).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut applied = 0;
    let mut best = 0.0f64;
    while applied < opts.max_iterations {
        let s = norm(&start);
        let mut basis: Vec<Vec<Complex64>> = vec![start.iter().map(|v| v / s).collect()];
        let (mut alpha, mut beta) = (Vec::new(), Vec::new());
        loop {
            let q = basis.last().unwrap();
            let mut w = op(q);
            applied += 1;
            if w.iter().any(|v| !v.is_finite()) {
                return singular(applied);
            }
            alpha.push(dot(q, &w).re);
            // full reorthogonalization, twice
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let bnext = norm(&w);
            let k = alpha.len();
            let mut t = nalgebra::DMatrix::<f64>::zeros(k, k);
            for i in 0..k {
                t[(i, i)] = alpha[i];
                if i + 1 < k {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = nalgebra::SymmetricEigen::new(t);
            let top = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap();
            let theta = eig.eigenvalues[top];
            let resid = bnext * eig.eigenvectors[(k - 1, top)].abs();
            best = theta;
            let done = resid <= opts.tolerance * theta || bnext <= 1e-14 * theta;
            if done || k == LANCZOS_BASIS || applied >= opts.max_iterations {
                if done {
                    return Ok(SigmaMin { value: 1.0 / theta.sqrt(), iterations: applied, converged: true, dense: false });
                }
                // restart from the current Ritz vector
                start = vec![Complex64::new(0.0, 0.0); n];
                for (j, b) in basis.iter().enumerate() {
                    let c = eig.eigenvectors[(j, top)];
                    start.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
                }
                break;
            }
            beta.push(bnext);
            basis.push(w.iter().map(|v| v / bnext).collect());
        }
    }
    Ok(SigmaMin { value: 1.0 / best.sqrt(), iterations: applied, converged: false, dense: false })
}

pub fn sigma_min(p: &DiscretePencil, opts: &SweepOptions) -> Result<SigmaMin, OracleError> {
    if opts.allow_dense && p.dim() < DENSE_LIMIT {
        Ok(sigma_min_dense(p))
    } else {
        sigma_min_sparse(p, opts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub re_omega: f64,
    pub im_omega: f64,
    pub sigma_min: f64,
    /// Number of unknowns of the discrete pencil.
    pub grid_n: usize,
    pub converged: bool,
    pub iterations: usize,
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("re_omega,im_omega,sigma_min,grid_n,converged\n");
    for r in rows {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{},{}", r.re_omega, r.im_omega, r.sigma_min, r.grid_n, r.converged as u8);
    }
    s
}

/// `σ_min` at every sample, in sample order.
pub fn sigma_min_sweep(domain: &DomainSpec, field: &CoefficientField, omegas: &[Complex64], params: &GridParams, opts: &SweepOptions) -> Result<Vec<SweepRow>, OracleError> {
    if omegas.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
        return Err(OracleError::InvalidGrid("omega samples must be finite".into()));
    }
    omegas
        .par_iter()
        .map(|&omega| {
            let p = assemble(domain, field, omega, params)?;
            let s = sigma_min(&p, opts)?;
            Ok(SweepRow { re_omega: omega.re, im_omega: omega.im, sigma_min: s.value, grid_n: p.dim(), converged: s.converged, iterations: s.iterations })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{AtInfinity, RadialProfile, RadialTerm, TensorField};
    use crate::linalg::scalar;
    use crate::Mat3;

    fn cavity() -> (DomainSpec, CoefficientField) {
        let pi = std::f64::consts::PI;
        (DomainSpec::BoundedBox { l: [pi, pi, pi] }, CoefficientField::isotropic(1.0, 1.0, 0.0).unwrap())
    }

    #[test]
    fn inverse_iteration_agrees_with_dense_svd() {
        let (d, f) = cavity();
        for omega in [Complex64::new(0.7, 0.0), Complex64::new(1.3, 0.1)] {
            let p = assemble(&d, &f, omega, &GridParams::new([4, 4, 5], [1.0; 3])).unwrap();
            let dense = sigma_min_dense(&p);
            let it = sigma_min_sparse(&p, &SweepOptions::default()).unwrap();
            assert!(it.converged);
            assert!((dense.value - it.value).abs() <= 1e-6 * dense.value, "{dense:?} {it:?}");
        }
    }

    #[test]
    fn cavity_margin_is_stable_under_refinement() {
        // ω = 0.7 is away from 0 and from the first cavity frequency √2
        let (d, f) = cavity();
        let opts = SweepOptions { allow_dense: false, ..Default::default() };
        let s: Vec<f64> = [6, 10]
            .iter()
            .map(|&n| sigma_min_sweep(&d, &f, &[Complex64::new(0.7, 0.0)], &GridParams::new([n; 3], [1.0; 3]), &opts).unwrap()[0].sigma_min)
            .collect();
        assert!(s[0] > 0.1 && s[1] > 0.1, "{s:?}");
        assert!((s[0] / s[1] - 1.0).abs() < 0.2, "{s:?}");
    }

    #[test]
    fn exact_kernel_at_the_conductive_point() {
        // ωε + iσ = 0: discrete gradients are exact kernel vectors
        let f = CoefficientField::isotropic(1.0, 1.0, 0.5).unwrap();
        let p = assemble(&DomainSpec::FullSpace, &f, Complex64::new(0.0, -0.5), &GridParams::new([4; 3], [2.0; 3])).unwrap();
        assert!(sigma_min_dense(&p).value < 1e-12);
    }

    #[test]
    fn conductive_point_sigma_min_drops_as_the_truncation_grows() {
        let sigma0 = 0.5;
        let sigma = TensorField::radial(scalar(sigma0), vec![RadialTerm::new(Mat3::identity(), RadialProfile::Exponential { rate: 1.0 })]);
        let f = CoefficientField::new(TensorField::scalar(1.0), TensorField::scalar(1.0), sigma, 100.0, AtInfinity::new(1.0, 1.0, sigma0).unwrap()).unwrap();
        let omega = Complex64::new(0.0, -sigma0);
        let opts = SweepOptions { allow_dense: false, ..Default::default() };
        let s: Vec<f64> = [4.0, 8.0, 16.0]
            .iter()
            .map(|&p1: &f64| {
                let params = GridParams::new([(p1 * 8.0) as usize, 4, 4], [p1, 0.5, 0.5]);
                sigma_min_sweep(&DomainSpec::FullSpace, &f, &[omega], &params, &opts).unwrap()[0].sigma_min
            })
            .collect();
        for w in s.windows(2) {
            assert!(w[1] <= 0.7 * w[0], "{s:?}");
        }
    }

    #[test]
    fn csv_layout() {
        let rows = [SweepRow { re_omega: 1.0, im_omega: 0.0, sigma_min: 0.5, grid_n: 10, converged: true, iterations: 3 }];
        let csv = sweep_to_csv(&rows);
        assert_eq!(csv.lines().next().unwrap(), "re_omega,im_omega,sigma_min,grid_n,converged");
        assert!(csv.lines().nth(1).unwrap().ends_with(",10,1"));
    }

    #[test]
    fn oversized_grid_is_refused() {
        let (d, f) = cavity();
        let mut params = GridParams::new([40; 3], [1.0; 3]);
        params.memory_budget = 1 << 20;
        assert!(matches!(assemble(&d, &f, Complex64::new(0.5, 0.0), &params), Err(OracleError::GridTooLarge { .. })));
    }
}
