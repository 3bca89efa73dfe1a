//! Raw coefficient files: little-endian complex128 `(re, im)`, components in order,
//! each row-major over `(j1, j2, j3)`, with a JSON sidecar next to the data.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Axis, Basis, HelmholtzError, Parity, SpectralField, SpectralGrid};
use crate::spectrum::DomainSpec;

pub const LAYOUT: &str = "complex128-le, component-major, row-major";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSidecar {
    pub parity: Parity,
    pub modes: [usize; 3],
    pub axes: [Axis; 3],
    pub component_bases: [[Basis; 3]; 3],
    pub domain: DomainSpec,
    pub layout: String,
}

impl FieldSidecar {
    pub fn for_field(f: &SpectralField) -> Self {
        FieldSidecar {
            parity: f.parity,
            modes: f.grid.shape(),
            axes: f.grid.axes,
            component_bases: std::array::from_fn(|c| f.bases(c)),
            domain: f.grid.domain.clone(),
            layout: LAYOUT.into(),
        }
    }

    pub fn path_for(data: &Path) -> PathBuf {
        data.with_extension("json")
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> HelmholtzError {
    HelmholtzError::Io(format!("{}: {e}", path.display()))
}

/// Writes `data` and its sidecar (`data` with extension `.json`).
pub fn write_field(data: &Path, f: &SpectralField) -> Result<PathBuf, HelmholtzError> {
    let mut bytes = Vec::with_capacity(3 * f.comps[0].len() * 16);
    for comp in &f.comps {
        for v in comp.iter() {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    fs::write(data, bytes).map_err(|e| io_err(data, e))?;
    let side = FieldSidecar::path_for(data);
    let json = serde_json::to_string_pretty(&FieldSidecar::for_field(f)).map_err(|e| io_err(&side, e))?;
    fs::write(&side, json).map_err(|e| io_err(&side, e))?;
    Ok(side)
}

pub fn read_field(data: &Path) -> Result<SpectralField, HelmholtzError> {
    let side = FieldSidecar::path_for(data);
    let text = fs::read_to_string(&side).map_err(|e| io_err(&side, e))?;
    let meta: FieldSidecar = serde_json::from_str(&text).map_err(|e| io_err(&side, e))?;
    if meta.layout != LAYOUT {
        return Err(io_err(&side, format!("unsupported layout {:?}", meta.layout)));
    }
    let grid = SpectralGrid::new(meta.axes, meta.domain.clone())?;
    if grid.shape() != meta.modes {
        return Err(io_err(&side, "modes disagree with axes"));
    }
    let f = SpectralField::zeros(&grid, meta.parity);
    if meta.component_bases != std::array::from_fn(|c| f.bases(c)) {
        return Err(io_err(&side, "component bases disagree with parity and axes"));
    }
    let bytes = fs::read(data).map_err(|e| io_err(data, e))?;
    let n = f.comps[0].len();
    if bytes.len() != 3 * n * 16 {
        return Err(io_err(data, format!("expected {} bytes, found {}", 3 * n * 16, bytes.len())));
    }
    let vals: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| Complex64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap())))
        .collect();
    let shape = grid.shape();
    let comps = std::array::from_fn(|c| Array3::from_shape_vec(shape, vals[c * n..(c + 1) * n].to_vec()).expect("length checked"));
    Ok(SpectralField { grid, parity: meta.parity, comps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let g = SpectralGrid::cylinder([1.0, 2.0], 4.0, [4, 3, 5]).unwrap();
        let f = SpectralField::random(&g, Parity::Electric, 5);
        let p = dir.path().join("f.bin");
        let side = write_field(&p, &f).unwrap();
        assert_eq!(side, dir.path().join("f.json"));
        assert_eq!(fs::metadata(&p).unwrap().len(), 3 * 60 * 16);
        assert_eq!(read_field(&p).unwrap(), f);
    }

    #[test]
    fn layout_is_component_then_row_major() {
        let dir = tempfile::tempdir().unwrap();
        let g = SpectralGrid::periodic_box([1.0; 3], [2, 2, 2]).unwrap();
        let mut f = SpectralField::zeros(&g, Parity::Magnetic);
        f.comps[1][[0, 1, 1]] = Complex64::new(2.5, -1.0);
        let p = dir.path().join("g.bin");
        write_field(&p, &f).unwrap();
        let bytes = fs::read(&p).unwrap();
        let off = (8 + 3) * 16;
        assert_eq!(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()), 2.5);
        assert_eq!(f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap()), -1.0);
    }

    #[test]
    fn truncated_or_inconsistent_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = SpectralGrid::slab(1.0, [1.0, 1.0], [2, 2, 3]).unwrap();
        let f = SpectralField::random(&g, Parity::Magnetic, 1);
        let p = dir.path().join("h.bin");
        write_field(&p, &f).unwrap();
        let mut bytes = fs::read(&p).unwrap();
        bytes.pop();
        fs::write(&p, &bytes).unwrap();
        assert!(matches!(read_field(&p), Err(HelmholtzError::Io(_))));
        write_field(&p, &f).unwrap();
        let side = FieldSidecar::path_for(&p);
        let text = fs::read_to_string(&side).unwrap().replace("\"magnetic\"", "\"electric\"");
        fs::write(&side, text).unwrap();
        assert!(read_field(&p).is_err());
    }
}
