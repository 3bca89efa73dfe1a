//! Small dense helpers shared by the modules.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::Mat3;

/// Eigen-decomposition of a symmetric 3×3 matrix with eigenvalues sorted ascending.
#[derive(Clone, Debug)]
pub struct SortedEigen {
    pub values: [f64; 3],
    pub vectors: [Vector3<f64>; 3],
}

impl SortedEigen {
    pub fn new(m: &Mat3) -> Self {
        let sym = symmetrize(m);
        let eig = SymmetricEigen::new(sym);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.map(|i| eig.eigenvalues[i]);
        let vectors = order.map(|i| eig.eigenvectors.column(i).into_owned());
        SortedEigen { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[2]
    }
}

pub fn symmetrize(m: &Mat3) -> Mat3 {
    (m + m.transpose()) * 0.5
}

/// Spectral norm of a symmetric matrix (largest eigenvalue modulus).
pub fn sym_norm2(m: &Mat3) -> f64 {
    let e = SortedEigen::new(m);
    e.min().abs().max(e.max().abs())
}

/// Largest componentwise asymmetry `max |m_ij − m_ji|`.
pub fn asymmetry(m: &Mat3) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn is_finite(m: &Mat3) -> bool {
    m.iter().all(|v| v.is_finite())
}

pub fn scalar(s: f64) -> Mat3 {
    Matrix3::identity() * s
}
