//! Staggered grid and sparse assembly of the discrete pencil.
//!
//! `E_c` sits at edge midpoints (half-integer along `c`), `H_c` at face centres
//! (half-integer across `c`). Tangential `E` on walls is eliminated; truncated
//! unbounded axes wrap periodically.

use nalgebra::SMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GridParams, OracleError};
use crate::coefficients::{CoefficientField, RadialProfile, Tensor, TensorField};
use crate::spectrum::DomainSpec;
use crate::Point;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisKind {
    Periodic,
    Walled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YeeAxis {
    pub kind: AxisKind,
    pub origin: f64,
    pub extent: f64,
    pub cells: usize,
}

impl YeeAxis {
    pub fn h(&self) -> f64 {
        self.extent / self.cells as f64
    }

    /// Index range `[lo, hi)` of a staggered family along this axis.
    fn range(&self, half: bool, tangential_e: bool) -> (i64, i64) {
        let n = self.cells as i64;
        match (self.kind, half) {
            (_, true) | (AxisKind::Periodic, false) => (0, n),
            (AxisKind::Walled, false) if tangential_e => (1, n),
            (AxisKind::Walled, false) => (0, n + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    E,
    H,
}

#[derive(Clone, Debug)]
struct Block {
    lo: [i64; 3],
    dims: [usize; 3],
    offset: usize,
}

#[derive(Clone, Debug)]
pub struct YeeGrid {
    pub axes: [YeeAxis; 3],
    blocks: [[Block; 3]; 2],
    pub n_e: usize,
    pub n_h: usize,
}

fn is_half(f: Family, c: usize, a: usize) -> bool {
    (f == Family::E) == (a == c)
}

impl YeeGrid {
    pub fn new(axes: [YeeAxis; 3]) -> Result<Self, OracleError> {
        for a in &axes {
            if a.cells < 2 || !(a.extent > 0.0 && a.extent.is_finite()) {
                return Err(OracleError::InvalidGrid(format!("axis {a:?} needs at least two cells and a positive extent")));
            }
        }
        let mut offset = 0;
        let mut make = |f: Family| -> [Block; 3] {
            std::array::from_fn(|c| {
                let mut lo = [0i64; 3];
                let mut dims = [0usize; 3];
                for a in 0..3 {
                    let (l, h) = axes[a].range(is_half(f, c, a), f == Family::E && a != c);
                    lo[a] = l;
                    dims[a] = (h - l) as usize;
                }
                let b = Block { lo, dims, offset };
                offset += dims.iter().product::<usize>();
                b
            })
        };
        let e = make(Family::E);
        let h = make(Family::H);
        let n_e: usize = e.iter().map(|b| b.dims.iter().product::<usize>()).sum();
        let n_h: usize = h.iter().map(|b| b.dims.iter().product::<usize>()).sum();
        Ok(YeeGrid { axes, blocks: [e, h], n_e, n_h })
    }

    /// Grid for a supported domain: walls where the domain has them, periodic
    /// truncation with `params.periods` elsewhere. Periodic axes are centred at 0.
    pub fn for_domain(domain: &DomainSpec, params: &GridParams) -> Result<Self, OracleError> {
        let p = |a: usize| YeeAxis { kind: AxisKind::Periodic, origin: -0.5 * params.periods[a], extent: params.periods[a], cells: params.cells[a] };
        let w = |a: usize, l: f64| YeeAxis { kind: AxisKind::Walled, origin: 0.0, extent: l, cells: params.cells[a] };
        let axes = match domain {
            DomainSpec::FullSpace => [p(0), p(1), p(2)],
            DomainSpec::HalfSpace => [p(0), p(1), w(2, params.periods[2])],
            DomainSpec::Slab { l } => [p(0), p(1), w(2, *l)],
            DomainSpec::Cylinder { l } => [p(0), w(1, l[0]), w(2, l[1])],
            DomainSpec::BoundedBox { l } => [w(0, l[0]), w(1, l[1]), w(2, l[2])],
        };
        Self::new(axes)
    }

    pub fn unknowns(&self) -> usize {
        self.n_e + self.n_h
    }

    pub fn is_periodic(&self) -> bool {
        self.axes.iter().all(|a| a.kind == AxisKind::Periodic)
    }

    /// Global index of `(family, component, logical index)`; periodic axes wrap,
    /// eliminated or out-of-range positions give `None`.
    pub fn index(&self, f: Family, c: usize, p: [i64; 3]) -> Option<usize> {
        let b = &self.blocks[f as usize][c];
        let mut flat = 0usize;
        for a in 0..3 {
            let mut i = p[a];
            if self.axes[a].kind == AxisKind::Periodic {
                i = i.rem_euclid(self.axes[a].cells as i64);
            }
            let j = i - b.lo[a];
            if j < 0 || j >= b.dims[a] as i64 {
                return None;
            }
            flat = flat * b.dims[a] + j as usize;
        }
        Some(b.offset + flat)
    }

    /// Physical location of a logical index (not wrapped).
    pub fn position(&self, f: Family, c: usize, p: [i64; 3]) -> Point {
        Point::from_fn(|a, _| {
            let ax = &self.axes[a];
            let shift = if is_half(f, c, a) { 0.5 } else { 0.0 };
            ax.origin + (p[a] as f64 + shift) * ax.h()
        })
    }

    /// Every stored `(logical index, global index)` of one family/component.
    pub fn dofs(&self, f: Family, c: usize) -> impl Iterator<Item = ([i64; 3], usize)> + '_ {
        let b = &self.blocks[f as usize][c];
        let [n0, n1, n2] = b.dims;
        (0..n0 * n1 * n2).map(move |flat| {
            let (i, r) = (flat / (n1 * n2), flat % (n1 * n2));
            let (j, k) = (r / n2, r % n2);
            ([b.lo[0] + i as i64, b.lo[1] + j as i64, b.lo[2] + k as i64], b.offset + flat)
        })
    }

    /// Wraps periodic coordinates into `[origin, origin + extent)`.
    fn canonical(&self, x: Point) -> Point {
        Point::from_fn(|a, _| {
            let ax = &self.axes[a];
            match ax.kind {
                AxisKind::Periodic => ax.origin + (x[a] - ax.origin).rem_euclid(ax.extent),
                AxisKind::Walled => x[a],
            }
        })
    }
}

/// Sparse discrete pencil `(E, H) ↦ (curl_h H + i(ωε + iσ)E, curl_h E − iωμH)`.
#[derive(Clone, Debug)]
pub struct DiscretePencil {
    pub grid: YeeGrid,
    pub omega: Complex64,
    /// Sorted by `(row, col)`, duplicates summed.
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl DiscretePencil {
    pub fn dim(&self) -> usize {
        self.grid.unknowns()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// `‖SM + (SM)^†‖_max` with `S = diag(I, −I)`; zero for real `ω` and `σ = 0`.
    pub fn anti_hermitian_defect(&self) -> f64 {
        let n_e = self.grid.n_e;
        let s = |r: usize| if r < n_e { 1.0 } else { -1.0 };
        let mut sm: Vec<(usize, usize, Complex64)> = self.entries.iter().map(|&(r, c, v)| (r, c, v * s(r))).collect();
        let adj: Vec<(usize, usize, Complex64)> = sm.iter().map(|&(r, c, v)| (c, r, v.conj())).collect();
        sm.extend(adj);
        merge(&mut sm).iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim(), self.dim());
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `M` restricted to the plane waves `e^{ik·x}` on each of the six component
    /// families (fully periodic grids only).
    pub fn mode_matrix(&self, k: [f64; 3]) -> Result<SMatrix<Complex64, 6, 6>, OracleError> {
        if !self.grid.is_periodic() {
            return Err(OracleError::InvalidGrid("plane-wave restriction needs a fully periodic grid".into()));
        }
        let kv = Point::from(k);
        let fams = [(Family::E, 0), (Family::E, 1), (Family::E, 2), (Family::H, 0), (Family::H, 1), (Family::H, 2)];
        let wave = |slot: usize| {
            let (f, c) = fams[slot];
            let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
            for (p, g) in self.grid.dofs(f, c) {
                v[g] = (I * kv.dot(&self.grid.position(f, c, p))).exp();
            }
            v
        };
        let waves: Vec<Vec<Complex64>> = (0..6).map(wave).collect();
        let mut m = SMatrix::<Complex64, 6, 6>::zeros();
        for col in 0..6 {
            let y = self.apply(&waves[col]);
            for row in 0..6 {
                let (num, den) = waves[row].iter().zip(&y).fold((Complex64::new(0.0, 0.0), 0.0), |(n, d), (w, y)| (n + w.conj() * y, d + w.norm_sqr()));
                m[(row, col)] = num / den;
            }
        }
        Ok(m)
    }
}

fn merge(entries: &mut Vec<(usize, usize, Complex64)>) -> Vec<(usize, usize, Complex64)> {
    entries.sort_by_key(|e| (e.0, e.1));
    let mut out: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
    for &(r, c, v) in entries.iter() {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|e| e.2 != Complex64::new(0.0, 0.0));
    out
}

/// `(ξ_h)_a = (2/h_a) sin(k_a h_a/2)`, the symbol of the staggered difference.
pub fn discrete_wavevector(grid: &YeeGrid, k: [f64; 3]) -> Point {
    Point::from_fn(|a, _| {
        let h = grid.axes[a].h();
        2.0 / h * (0.5 * k[a] * h).sin()
    })
}

/// Shortest length scale of the radial terms (width, inverse rate, bump radius).
pub fn variation_length(field: &CoefficientField) -> Option<f64> {
    let mut out: Option<f64> = None;
    for which in Tensor::ALL {
        if let TensorField::Analytic { terms, .. } = field.tensor(which) {
            for t in terms {
                let l = match t.profile {
                    RadialProfile::Gaussian { width } => width,
                    RadialProfile::Exponential { rate } => 1.0 / rate,
                    RadialProfile::Bump { radius } => radius,
                    RadialProfile::Algebraic { .. } => 1.0,
                    RadialProfile::Distance => continue,
                };
                out = Some(out.map_or(l, |o| o.min(l)));
            }
        }
    }
    out
}

/// Cyclic `(b, c)` after `a`.
fn cyc(a: usize) -> (usize, usize) {
    ((a + 1) % 3, (a + 2) % 3)
}

fn shifted(p: [i64; 3], a: usize, d: i64) -> [i64; 3] {
    let mut q = p;
    q[a] += d;
    q
}

pub fn assemble(domain: &DomainSpec, field: &CoefficientField, omega: Complex64, params: &GridParams) -> Result<DiscretePencil, OracleError> {
    let grid = YeeGrid::for_domain(domain, params)?;
    let hmax = grid.axes.iter().map(|a| a.h()).fold(0.0, f64::max);
    if let Some(l) = variation_length(field) {
        if hmax > l / 8.0 {
            return Err(OracleError::InvalidGrid(format!("spacing {hmax:.4} does not resolve the coefficient scale {l:.4} (need h <= scale/8)")));
        }
    }
    let estimate = params.memory_estimate(grid.unknowns());
    if estimate > params.memory_budget {
        return Err(OracleError::GridTooLarge { unknowns: grid.unknowns(), estimate_bytes: estimate, budget_bytes: params.memory_budget });
    }
    let h: [f64; 3] = std::array::from_fn(|a| grid.axes[a].h());
    let mut t: Vec<(usize, usize, Complex64)> = Vec::with_capacity(14 * grid.unknowns());
    let mut push = |r: Option<usize>, c: Option<usize>, v: Complex64| {
        if let (Some(r), Some(c)) = (r, c) {
            t.push((r, c, v));
        }
    };
    let one = Complex64::new(1.0, 0.0);
    for a in 0..3 {
        let (b, c) = cyc(a);
        // curl_h E into H_a rows: ∂_b E_c − ∂_c E_b
        for (p, row) in grid.dofs(Family::H, a) {
            push(Some(row), grid.index(Family::E, c, shifted(p, b, 1)), one / h[b]);
            push(Some(row), grid.index(Family::E, c, p), -one / h[b]);
            push(Some(row), grid.index(Family::E, b, shifted(p, c, 1)), -one / h[c]);
            push(Some(row), grid.index(Family::E, b, p), one / h[c]);
        }
        // curl_h H into E_a rows
        for (p, row) in grid.dofs(Family::E, a) {
            push(Some(row), grid.index(Family::H, c, p), one / h[b]);
            push(Some(row), grid.index(Family::H, c, shifted(p, b, -1)), -one / h[b]);
            push(Some(row), grid.index(Family::H, b, p), -one / h[c]);
            push(Some(row), grid.index(Family::H, b, shifted(p, c, -1)), one / h[c]);
        }
    }
    // material blocks; off-diagonal couplings average the four nearest neighbours
    for (fam, tensors) in [(Family::E, [Tensor::Eps, Tensor::Sigma]), (Family::H, [Tensor::Mu, Tensor::Mu])] {
        let coef = |x: &Point, i: usize, j: usize| -> Complex64 {
            match fam {
                Family::E => I * (omega * field.eval(tensors[0], x)[(i, j)] + I * field.eval(tensors[1], x)[(i, j)]),
                Family::H => -I * omega * field.eval(tensors[0], x)[(i, j)],
            }
        };
        for a in 0..3 {
            for (p, row) in grid.dofs(fam, a) {
                let x = grid.position(fam, a, p);
                push(Some(row), Some(row), coef(&x, a, a));
                for bb in 0..3 {
                    if bb == a {
                        continue;
                    }
                    // neighbours of the other component along a and bb
                    let da: [i64; 2] = if is_half(fam, a, a) { [0, 1] } else { [-1, 0] };
                    let db: [i64; 2] = if is_half(fam, a, bb) { [0, 1] } else { [-1, 0] };
                    for sa in da {
                        for sb in db {
                            let q = shifted(shifted(p, a, sa), bb, sb);
                            let Some(col) = grid.index(fam, bb, q) else { continue };
                            let mid = grid.canonical((x + grid.position(fam, bb, q)) * 0.5);
                            let v = coef(&mid, a, bb) * 0.25;
                            if v != Complex64::new(0.0, 0.0) {
                                push(Some(row), Some(col), v);
                            }
                        }
                    }
                }
            }
        }
    }
    let entries = merge(&mut t);
    Ok(DiscretePencil { grid, omega, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{AtInfinity, RadialTerm};
    use crate::symbol::pencil_symbol;
    use crate::Mat3;

    fn periodic(n: usize, p: f64) -> GridParams {
        GridParams::new([n; 3], [p; 3])
    }

    #[test]
    fn dof_counts() {
        let g = YeeGrid::for_domain(&DomainSpec::Cylinder { l: [1.0, 2.0] }, &GridParams::new([4, 3, 5], [2.0; 3])).unwrap();
        // E1: 4·2·4, E2: 4·3·4, E3: 4·2·5; H1: 4·3·5, H2: 4·4·5, H3: 4·3·6
        assert_eq!(g.n_e, 32 + 48 + 40);
        assert_eq!(g.n_h, 60 + 80 + 72);
        assert_eq!(g.index(Family::E, 0, [0, 0, 1]), None);
        assert_eq!(g.index(Family::E, 0, [4, 1, 1]), g.index(Family::E, 0, [0, 1, 1]));
    }

    #[test]
    fn curl_blocks_are_transposes() {
        let field = CoefficientField::isotropic(1.0, 1.0, 0.0).unwrap();
        for d in [DomainSpec::FullSpace, DomainSpec::Cylinder { l: [1.0, 1.5] }, DomainSpec::BoundedBox { l: [1.0, 1.0, 2.0] }] {
            let p = assemble(&d, &field, Complex64::new(0.0, 0.0), &GridParams::new([4, 5, 3], [2.0; 3])).unwrap();
            let n_e = p.grid.n_e;
            let m = p.to_dense();
            let upper = m.view((0, n_e), (n_e, p.grid.n_h)).into_owned();
            let lower = m.view((n_e, 0), (p.grid.n_h, n_e)).into_owned();
            assert_eq!(upper, lower.transpose());
        }
    }

    #[test]
    fn curl_of_discrete_gradient_vanishes() {
        let field = CoefficientField::isotropic(1.0, 1.0, 0.0).unwrap();
        let d = DomainSpec::Cylinder { l: [1.0, 1.5] };
        let p = assemble(&d, &field, Complex64::new(0.0, 0.0), &GridParams::new([4, 5, 6], [2.0; 3])).unwrap();
        // φ on nodes, zero on the walls; E_c = (φ(p + e_c) − φ(p))/h_c
        let phi = |q: [i64; 3]| {
            let walls = (q[1] <= 0 || q[1] >= 5) || (q[2] <= 0 || q[2] >= 6);
            if walls {
                0.0
            } else {
                ((q[0].rem_euclid(4) * 7 + q[1] * 3 + q[2] * q[2]) % 11) as f64
            }
        };
        let mut x = vec![Complex64::new(0.0, 0.0); p.dim()];
        for c in 0..3 {
            for (q, g) in p.grid.dofs(Family::E, c) {
                x[g] = Complex64::from((phi(shifted(q, c, 1)) - phi(q)) / p.grid.axes[c].h());
            }
        }
        let y = p.apply(&x);
        assert!(y.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn zero_frequency_e_block_vanishes() {
        let field = CoefficientField::isotropic(2.0, 3.0, 0.0).unwrap();
        let p = assemble(&DomainSpec::FullSpace, &field, Complex64::new(0.0, 0.0), &periodic(4, 2.0)).unwrap();
        assert!(p.entries.iter().all(|&(r, c, _)| !(r < p.grid.n_e && c < p.grid.n_e)));
        assert!(p.entries.iter().all(|&(r, c, _)| !(r >= p.grid.n_e && c >= p.grid.n_e)));
    }

    #[test]
    fn anti_hermitian_for_real_omega_without_conductivity() {
        let eps = TensorField::radial(Mat3::new(2.0, 0.3, 0.0, 0.3, 1.5, 0.2, 0.0, 0.2, 1.0), vec![RadialTerm::new(Mat3::identity(), RadialProfile::Gaussian { width: 1.0 })]);
        let field = CoefficientField::new(eps, TensorField::scalar(1.2), TensorField::scalar(0.0), 100.0, AtInfinity::new(2.0, 1.2, 0.0).unwrap()).unwrap();
        for d in [DomainSpec::FullSpace, DomainSpec::Slab { l: 1.0 }] {
            let p = assemble(&d, &field, Complex64::new(0.8, 0.0), &periodic(8, 1.0)).unwrap();
            assert!(p.anti_hermitian_defect() <= 1e-12);
        }
        let lossy = CoefficientField::isotropic(1.0, 1.0, 0.5).unwrap();
        let p = assemble(&DomainSpec::FullSpace, &lossy, Complex64::new(0.8, 0.0), &periodic(4, 1.0)).unwrap();
        assert!(p.anti_hermitian_defect() > 0.5);
    }

    /// Eigenvalues of `b` matched greedily to those of `a`.
    fn eig_distance(a: &SMatrix<Complex64, 6, 6>, b: &SMatrix<Complex64, 6, 6>) -> f64 {
        let ea = a.schur().eigenvalues().unwrap();
        let eb = b.schur().eigenvalues().unwrap();
        let mut used = [false; 6];
        let mut worst = 0.0f64;
        for x in ea.iter() {
            let (j, d) = (0..6).filter(|j| !used[*j]).map(|j| (j, (eb[j] - x).norm())).min_by(|p, q| p.1.total_cmp(&q.1)).unwrap();
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }

    #[test]
    fn single_mode_equals_discrete_symbol() {
        let (eps0, mu0, sigma0) = (1.5, 0.8, 0.3);
        let field = CoefficientField::isotropic(eps0, mu0, sigma0).unwrap();
        let omega = Complex64::new(1.1, -0.2);
        let p = assemble(&DomainSpec::FullSpace, &field, omega, &GridParams::new([6, 5, 4], [2.0, 3.0, 2.5])).unwrap();
        let k = [2.0 * std::f64::consts::PI / 2.0, -2.0 * 2.0 * std::f64::consts::PI / 3.0, 2.0 * std::f64::consts::PI / 2.5];
        let mk = p.mode_matrix(k).unwrap();
        let sym = pencil_symbol(omega, &discrete_wavevector(&p.grid, k), eps0, mu0, sigma0);
        assert!((mk - sym.matrix).norm() <= 1e-12 * sym.matrix.norm());
        assert!(eig_distance(&mk, &sym.matrix) <= 1e-10);
    }
}
