//! `u = ∇q + w` with `div w = 0` and `∇q ⊥ w` in L².

use serde::{Deserialize, Serialize};

use super::{HelmholtzError, Parity, ScalarBc, ScalarField, SpectralField, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionVariant {
    /// `q ∈ H¹₀`; `u` has electric parity.
    Dirichlet,
    /// `q ∈ H¹`; `u` has magnetic parity.
    Full,
}

impl ProjectionVariant {
    pub fn parity(self) -> Parity {
        match self {
            ProjectionVariant::Dirichlet => Parity::Electric,
            ProjectionVariant::Full => Parity::Magnetic,
        }
    }

    pub fn scalar_bc(self) -> ScalarBc {
        self.parity().scalar_bc()
    }
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub variant: ProjectionVariant,
    pub potential: ScalarField,
    pub gradient: SpectralField,
    pub solenoidal: SpectralField,
    /// `|⟨∇q, w⟩|`
    pub orthogonality: f64,
}

impl Projection {
    pub fn relative_orthogonality(&self, u: &SpectralField) -> f64 {
        let n = u.inner(u).re;
        if n > 0.0 {
            self.orthogonality / n
        } else {
            self.orthogonality
        }
    }
}

pub fn helmholtz_project(u: &SpectralField, variant: ProjectionVariant) -> Result<Projection, HelmholtzError> {
    if u.parity != variant.parity() {
        return Err(HelmholtzError::WrongParity { expected: variant.parity(), got: u.parity });
    }
    let div = u.div();
    let axes = u.grid.axes;
    let mut potential = ScalarField::zeros(&u.grid, variant.scalar_bc());
    for ((a, b, c), v) in potential.data.indexed_iter_mut() {
        let k2 = axes[0].wavenumber(a).powi(2) + axes[1].wavenumber(b).powi(2) + axes[2].wavenumber(c).powi(2);
        *v = if k2 > 0.0 { -div.data[[a, b, c]] / k2 } else { ZERO };
    }
    let gradient = potential.grad();
    let solenoidal = u.sub(&gradient);
    let orthogonality = gradient.inner(&solenoidal).norm();
    Ok(Projection { variant, potential, gradient, solenoidal, orthogonality })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::helmholtz::SpectralGrid;

    fn grids() -> Vec<SpectralGrid> {
        vec![
            SpectralGrid::slab(1.3, [2.0, 3.0], [6, 5, 7]).unwrap(),
            SpectralGrid::cylinder([1.0, 2.0], 4.0, [8, 6, 5]).unwrap(),
            SpectralGrid::periodic_box([2.0, 2.5, 3.0], [4, 6, 5]).unwrap(),
        ]
    }

    const VARIANTS: [ProjectionVariant; 2] = [ProjectionVariant::Dirichlet, ProjectionVariant::Full];

    #[test]
    fn orthogonal_and_idempotent() {
        for g in grids() {
            for v in VARIANTS {
                let u = SpectralField::random(&g, v.parity(), 3);
                let p = helmholtz_project(&u, v).unwrap();
                assert!(p.relative_orthogonality(&u) <= 1e-12, "{}", p.relative_orthogonality(&u));
                let scale = u.max_norm() * g.max_wavenumber();
                assert!(p.solenoidal.div().max_norm() <= 1e-12 * scale);
                let again = helmholtz_project(&p.solenoidal, v).unwrap();
                assert!(again.gradient.max_norm() <= 1e-13 * u.max_norm());
                // Pythagoras
                let lhs = u.inner(&u).re;
                let rhs = p.gradient.inner(&p.gradient).re + p.solenoidal.inner(&p.solenoidal).re;
                assert!((lhs - rhs).abs() <= 1e-12 * lhs);
            }
        }
    }

    #[test]
    fn gradients_project_to_themselves() {
        for g in grids() {
            for v in VARIANTS {
                let q = ScalarField::random(&g, v.scalar_bc(), 8);
                let u = q.grad();
                let p = helmholtz_project(&u, v).unwrap();
                assert!(p.solenoidal.max_norm() <= 1e-12 * u.max_norm());
            }
        }
    }

    #[test]
    fn wrong_parity_is_rejected() {
        let g = &grids()[1];
        let u = SpectralField::random(g, Parity::Magnetic, 1);
        assert!(matches!(helmholtz_project(&u, ProjectionVariant::Dirichlet), Err(HelmholtzError::WrongParity { .. })));
    }
}
